//! Disjoint-set forest with path halving and union by size.

#[derive(Clone, Debug)]
pub struct UnionFind {
    parent: Vec<u32>,
    size: Vec<u32>,
    sets: usize,
}

impl UnionFind {
    pub fn new(n: usize) -> Self {
        Self {
            parent: (0..n as u32).collect(),
            size: vec![1; n],
            sets: n,
        }
    }

    pub fn len(&self) -> usize {
        self.parent.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parent.is_empty()
    }

    pub fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] as usize != x {
            let gp = self.parent[self.parent[x] as usize];
            self.parent[x] = gp;
            x = gp as usize;
        }
        x
    }

    /// Returns true when `a` and `b` were in different sets.
    pub fn union(&mut self, a: usize, b: usize) -> bool {
        let (mut ra, mut rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        if self.size[ra] < self.size[rb] {
            std::mem::swap(&mut ra, &mut rb);
        }
        self.parent[rb] = ra as u32;
        self.size[ra] += self.size[rb];
        self.sets -= 1;
        true
    }

    pub fn set_count(&self) -> usize {
        self.sets
    }

    pub fn set_size(&mut self, x: usize) -> usize {
        let r = self.find(x);
        self.size[r] as usize
    }

    /// Dense labels `0..set_count()`, numbered in order of each set's smallest
    /// member.
    pub fn labels(&mut self) -> Vec<usize> {
        let n = self.len();
        let mut by_root = vec![usize::MAX; n];
        let mut out = Vec::with_capacity(n);
        let mut next = 0;
        for i in 0..n {
            let r = self.find(i);
            if by_root[r] == usize::MAX {
                by_root[r] = next;
                next += 1;
            }
            out.push(by_root[r]);
        }
        out
    }
}
