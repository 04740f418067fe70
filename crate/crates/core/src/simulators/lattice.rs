//! Square lattice with periodic boundaries. Site `r * side + c` sits at row `r`, column `c`.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Lattice {
    pub side: usize,
}

impl Lattice {
    pub fn new(side: usize) -> Self {
        Self { side }
    }

    pub fn n_sites(&self) -> usize {
        self.side * self.side
    }

    pub fn site(&self, row: usize, col: usize) -> usize {
        (row % self.side) * self.side + col % self.side
    }

    pub fn coords(&self, site: usize) -> (usize, usize) {
        (site / self.side, site % self.side)
    }

    /// Up, down, left, right. Entries repeat when `side == 2`.
    pub fn neighbours(&self, site: usize) -> [usize; 4] {
        let (r, c) = self.coords(site);
        let l = self.side;
        [self.site(r + l - 1, c), self.site(r + 1, c), self.site(r, c + l - 1), self.site(r, c + 1)]
    }

    /// Right and down bond of every site, `2 * side^2` entries. On a side-2
    /// lattice each neighbouring pair is joined by two bonds.
    pub fn bonds(&self) -> Vec<(usize, usize)> {
        (0..self.n_sites())
            .flat_map(|s| {
                let (r, c) = self.coords(s);
                [(s, self.site(r, c + 1)), (s, self.site(r + 1, c))]
            })
            .collect()
    }

    /// Indices into [`Lattice::bonds`] touching `site`.
    pub fn bonds_of(&self, site: usize) -> [usize; 4] {
        let [up, _, left, _] = self.neighbours(site);
        [2 * site, 2 * site + 1, 2 * left, 2 * up + 1]
    }

    /// Distinct nearest-neighbour pairs `(i, j)` with `i < j`, sorted.
    pub fn nn_pairs(&self) -> Vec<(usize, usize)> {
        let mut p: Vec<(usize, usize)> = self.bonds().into_iter().map(|(a, b)| (a.min(b), a.max(b))).collect();
        p.sort_unstable();
        p.dedup();
        p
    }

    pub fn is_nn(&self, a: usize, b: usize) -> bool {
        a != b && self.neighbours(a).contains(&b)
    }

    /// Every other pair of distinct sites, sorted.
    pub fn non_nn_pairs(&self) -> Vec<(usize, usize)> {
        let n = self.n_sites();
        (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).filter(|&(i, j)| !self.is_nn(i, j)).collect()
    }

    /// Plaquette anchored at `site`: itself, right, down, down-right.
    pub fn plaquette(&self, site: usize) -> [usize; 4] {
        let (r, c) = self.coords(site);
        [self.site(r, c), self.site(r, c + 1), self.site(r + 1, c), self.site(r + 1, c + 1)]
    }

    pub fn plaquettes(&self) -> Vec<[usize; 4]> {
        (0..self.n_sites()).map(|s| self.plaquette(s)).collect()
    }

    /// Anchors of the plaquettes containing `site`.
    pub fn plaquettes_of(&self, site: usize) -> [usize; 4] {
        let (r, c) = self.coords(site);
        let l = self.side;
        [self.site(r, c), self.site(r, c + l - 1), self.site(r + l - 1, c), self.site(r + l - 1, c + l - 1)]
    }

    /// The four 3-site subsets of every plaquette.
    pub fn plaquette_triples(&self) -> Vec<[usize; 3]> {
        self.plaquettes()
            .into_iter()
            .flat_map(|p| (0..4).map(move |skip| {
                let mut t = [0; 3];
                let mut k = 0;
                for (i, &s) in p.iter().enumerate() {
                    if i != skip {
                        t[k] = s;
                        k += 1;
                    }
                }
                t
            }))
            .collect()
    }

    /// Nearest neighbours of any target, minus the targets.
    pub fn ising_blanket(&self, targets: &[usize]) -> Vec<usize> {
        let mut out: Vec<usize> = targets.iter().flat_map(|&t| self.neighbours(t)).filter(|s| !targets.contains(s)).collect();
        out.sort_unstable();
        out.dedup();
        out
    }

    /// Sites sharing a plaquette with any target, minus the targets.
    pub fn plaquette_blanket(&self, targets: &[usize]) -> Vec<usize> {
        let mut out: Vec<usize> = targets
            .iter()
            .flat_map(|&t| self.plaquettes_of(t))
            .flat_map(|a| self.plaquette(a))
            .filter(|s| !targets.contains(s))
            .collect();
        out.sort_unstable();
        out.dedup();
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pair_counts() {
        let l = Lattice::new(8);
        assert_eq!(l.nn_pairs().len(), 128);
        assert_eq!(l.non_nn_pairs().len(), 64 * 63 / 2 - 128);
        assert_eq!(l.plaquette_triples().len(), 256);
    }

    #[test]
    fn blankets() {
        let l = Lattice::new(8);
        assert_eq!(l.ising_blanket(&[0, 1]).len(), 6);
        assert_eq!(l.ising_blanket(&[0, 10]).len(), 8);
        // the two sites share neighbours 1 and 8
        assert_eq!(l.ising_blanket(&[0, 9]).len(), 6);
        assert_eq!(l.plaquette_blanket(&l.plaquette(0)).len(), 12);
        assert_eq!(l.plaquette_blanket(&[0]).len(), 8);
    }

    #[test]
    fn bonds_of_site_touch_it() {
        for side in [2, 3, 5] {
            let l = Lattice::new(side);
            let bonds = l.bonds();
            for s in 0..l.n_sites() {
                let mine = l.bonds_of(s);
                for &b in &mine {
                    assert!(bonds[b].0 == s || bonds[b].1 == s);
                }
                let count = bonds.iter().filter(|(a, b)| *a == s || *b == s).count();
                assert_eq!(count, 4);
            }
        }
    }

    #[test]
    fn plaquettes_of_contain_site() {
        let l = Lattice::new(4);
        for s in 0..16 {
            for a in l.plaquettes_of(s) {
                assert!(l.plaquette(a).contains(&s));
            }
        }
    }
}
