//! Small helpers shared by the structures.

/// Reusable membership marks cleared in O(1) by bumping a generation.
#[derive(Clone, Debug, Default)]
pub(crate) struct Marks {
    stamp: Vec<u32>,
    generation: u32,
}

impl Marks {
    pub(crate) fn clear(&mut self) {
        self.generation = self.generation.wrapping_add(1);
        if self.generation == 0 {
            self.stamp.iter_mut().for_each(|s| *s = 0);
            self.generation = 1;
        }
    }

    pub(crate) fn set(&mut self, i: usize) {
        if self.stamp.len() <= i {
            self.stamp.resize(i + 1, 0);
        }
        self.stamp[i] = self.generation;
    }

    pub(crate) fn get(&self, i: usize) -> bool {
        self.generation != 0 && self.stamp.get(i) == Some(&self.generation)
    }
}

/// `floor(log2 x)` with `floor_log2(0) = 0`.
#[inline]
pub(crate) fn floor_log2(x: usize) -> usize {
    if x == 0 {
        0
    } else {
        x.ilog2() as usize
    }
}
