/// Tracks live and peak bytes of the big integers a computation holds.
///
/// Callers [`alloc`](MemoryMeter::alloc) when they retain a value and
/// [`free`](MemoryMeter::free) when they drop it. Byte sizes are the
/// magnitudes' bit lengths rounded up to whole bytes, so the readings are
/// deterministic across platforms and allocators.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct MemoryMeter {
    live: u64,
    peak: u64,
}

impl MemoryMeter {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn alloc(&mut self, bytes: u64) {
        self.live += bytes;
        self.peak = self.peak.max(self.live);
    }

    pub fn free(&mut self, bytes: u64) {
        debug_assert!(bytes <= self.live, "freeing more than is live");
        self.live = self.live.saturating_sub(bytes);
    }

    pub fn live(&self) -> u64 {
        self.live
    }

    pub fn peak(&self) -> u64 {
        self.peak
    }
}
