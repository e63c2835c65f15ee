//! Counter-based random substreams.
//!
//! Every random quantity in a run is drawn from a ChaCha8 stream keyed by
//! `(master seed, slot, cell, purpose)`. Any slot can be regenerated
//! without replaying the ones before it, and cells can be processed in any
//! order with identical results.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// What a substream is used for. Distinct purposes never share draws.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u8)]
pub enum Purpose {
    Channels = 1,
    Interference = 2,
    Auxiliary = 3,
    /// A user's channels to the other cells' base stations.
    CrossChannels = 4,
}

const INDEX_BITS: u32 = 12;
const CELL_BITS: u32 = 16;
const PURPOSE_BITS: u32 = 4;

/// Largest cell count the stream key can address.
pub const MAX_CELLS: usize = 1 << CELL_BITS;
/// Largest per-cell index (user) the stream key can address.
pub const MAX_INDEX: usize = 1 << INDEX_BITS;

/// Opens the substream for one `(slot, cell, purpose)` triple.
pub fn substream(master: u64, slot: u64, cell: usize, purpose: Purpose) -> ChaCha8Rng {
    indexed_substream(master, slot, cell, 0, purpose)
}

/// Opens the substream for one `(slot, cell, index, purpose)` tuple, for
/// draws that belong to a single user of a cell.
pub fn indexed_substream(master: u64, slot: u64, cell: usize, index: usize, purpose: Purpose) -> ChaCha8Rng {
    debug_assert!(cell < MAX_CELLS && index < MAX_INDEX);
    debug_assert!(slot < (1 << (64 - INDEX_BITS - CELL_BITS - PURPOSE_BITS)));
    let stream = (slot << (INDEX_BITS + CELL_BITS + PURPOSE_BITS))
        | ((purpose as u64) << (INDEX_BITS + CELL_BITS))
        | ((cell as u64) << INDEX_BITS)
        | index as u64;
    let mut rng = ChaCha8Rng::seed_from_u64(master);
    rng.set_stream(stream);
    rng
}

/// Derives an independent master seed for a labelled phase of an
/// experiment (warm-up, probe, measurement, ...). SplitMix64 finalizer.
pub fn derive_seed(master: u64, label: u64) -> u64 {
    let mut z = master ^ label.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
