use crate::model::{Composition, ModuleSpec};

use super::ModuleLibrary;

/// Length-lexicographic stream of grammar-valid module sequences: joint first,
/// no two links in a row, bounded length and joint count. Symbols are ordered
/// joint specs first, then link specs.
#[derive(Debug, Clone)]
pub struct Compositions<'a> {
    alphabet: Vec<&'a ModuleSpec>,
    n_joints: usize,
    max_modules: usize,
    max_motors: usize,
    seq: Vec<usize>,
    started: bool,
}

impl<'a> Compositions<'a> {
    pub(crate) fn new(lib: &'a ModuleLibrary) -> Self {
        Self {
            alphabet: lib.joint_specs.iter().chain(&lib.link_specs).collect(),
            n_joints: lib.joint_specs.len(),
            max_modules: lib.max_modules,
            max_motors: lib.max_motors,
            seq: Vec::new(),
            started: false,
        }
    }

    fn ok_at(&self, p: usize) -> bool {
        let joint = |s: usize| s < self.n_joints;
        let s = self.seq[p];
        if p == 0 && !joint(s) {
            return false;
        }
        if p > 0 && !joint(s) && !joint(self.seq[p - 1]) {
            return false;
        }
        self.seq[..=p].iter().filter(|&&x| joint(x)).count() <= self.max_motors
    }

    /// Smallest valid completion of positions `p..`.
    fn complete(&mut self, p: usize) -> bool {
        if p == self.seq.len() {
            return true;
        }
        for s in 0..self.alphabet.len() {
            self.seq[p] = s;
            if self.ok_at(p) && self.complete(p + 1) {
                return true;
            }
        }
        false
    }

    /// Next valid sequence of the current length.
    fn bump(&mut self) -> bool {
        for p in (0..self.seq.len()).rev() {
            for s in self.seq[p] + 1..self.alphabet.len() {
                self.seq[p] = s;
                if self.ok_at(p) && self.complete(p + 1) {
                    return true;
                }
            }
        }
        false
    }

    fn current(&self) -> Composition {
        let modules = self.seq.iter().map(|&s| self.alphabet[s].clone()).collect();
        Composition::new(modules).expect("grammar-valid sequences assemble")
    }
}

impl Iterator for Compositions<'_> {
    type Item = Composition;

    fn next(&mut self) -> Option<Composition> {
        if self.alphabet.is_empty() {
            return None;
        }
        if self.started && self.bump() {
            return Some(self.current());
        }
        loop {
            let len = if self.started { self.seq.len() + 1 } else { 1 };
            self.started = true;
            if len > self.max_modules {
                self.seq.clear();
                self.max_modules = 0;
                return None;
            }
            self.seq = vec![0; len];
            if self.complete(0) {
                return Some(self.current());
            }
        }
    }
}
