//! Direct-mapped vertex-property cache with next-block prefetch.

/// Lines hold `line_size` consecutive words; line `b` lives in set `b % lines`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CacheModel {
    tags: Vec<Option<u64>>,
    line_size: u64,
    prefetch: bool,
    pub hits: u64,
    pub misses: u64,
    pub prefetches: u64,
}

impl CacheModel {
    pub fn new(lines: usize, line_size: usize, prefetch: bool) -> Self {
        CacheModel {
            tags: vec![None; lines.max(1)],
            line_size: line_size.max(1) as u64,
            prefetch,
            hits: 0,
            misses: 0,
            prefetches: 0,
        }
    }

    pub fn line_size(&self) -> u64 {
        self.line_size
    }

    fn set_of(&self, block: u64) -> usize {
        (block % self.tags.len() as u64) as usize
    }

    fn present(&self, block: u64) -> bool {
        self.tags[self.set_of(block)] == Some(block)
    }

    fn fill(&mut self, block: u64) {
        let set = self.set_of(block);
        self.tags[set] = Some(block);
    }

    /// Reads the word at `addr`. Returns whether it hit.
    pub fn access(&mut self, addr: u64) -> bool {
        let block = addr / self.line_size;
        if self.present(block) {
            self.hits += 1;
            return true;
        }
        self.misses += 1;
        self.fill(block);
        if self.prefetch && !self.present(block + 1) && self.set_of(block + 1) != self.set_of(block) {
            self.prefetches += 1;
            self.fill(block + 1);
        }
        false
    }

    /// Drops every line overlapping the word range `[start, end)`.
    pub fn invalidate(&mut self, start: u64, end: u64) {
        if start >= end {
            return;
        }
        let (first, last) = (start / self.line_size, (end - 1) / self.line_size);
        for tag in self.tags.iter_mut() {
            if matches!(*tag, Some(b) if (first..=last).contains(&b)) {
                *tag = None;
            }
        }
    }

    /// Words moved from off-chip memory so far.
    pub fn words_fetched(&self) -> u64 {
        (self.misses + self.prefetches) * self.line_size
    }
}
