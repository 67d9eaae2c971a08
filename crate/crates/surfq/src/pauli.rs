//! Bit-packed Pauli rows with measurement-outcome ancestry.
//!
//! A row encodes `i^phase * prod_q X^x_q Z^z_q` together with a set of
//! measurement indices whose XOR determines the row's sign on the current
//! state. Ancestry sets propagate through row multiplication, which is how
//! detector definitions and logical frame corrections are derived without
//! per-case bookkeeping.

/// Sorted set of measurement indices with XOR (symmetric difference) merge.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct AncestrySet(Vec<u32>);

impl AncestrySet {
    pub fn new() -> Self {
        AncestrySet(Vec::new())
    }

    pub fn singleton(idx: u32) -> Self {
        AncestrySet(vec![idx])
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn contains(&self, idx: u32) -> bool {
        self.0.binary_search(&idx).is_ok()
    }

    pub fn iter(&self) -> impl Iterator<Item = u32> + '_ {
        self.0.iter().copied()
    }

    pub fn as_slice(&self) -> &[u32] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<u32> {
        self.0
    }

    /// XOR-merge `other` into `self`: indices present in both cancel.
    pub fn xor_with(&mut self, other: &AncestrySet) {
        if other.0.is_empty() {
            return;
        }
        let mut out = Vec::with_capacity(self.0.len() + other.0.len());
        let (mut i, mut j) = (0, 0);
        while i < self.0.len() && j < other.0.len() {
            match self.0[i].cmp(&other.0[j]) {
                std::cmp::Ordering::Less => {
                    out.push(self.0[i]);
                    i += 1;
                }
                std::cmp::Ordering::Greater => {
                    out.push(other.0[j]);
                    j += 1;
                }
                std::cmp::Ordering::Equal => {
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&self.0[i..]);
        out.extend_from_slice(&other.0[j..]);
        self.0 = out;
    }

    /// XOR in a single index.
    pub fn xor_index(&mut self, idx: u32) {
        match self.0.binary_search(&idx) {
            Ok(pos) => {
                self.0.remove(pos);
            }
            Err(pos) => {
                self.0.insert(pos, idx);
            }
        }
    }
}

impl FromIterator<u32> for AncestrySet {
    fn from_iter<T: IntoIterator<Item = u32>>(iter: T) -> Self {
        let mut v: Vec<u32> = iter.into_iter().collect();
        v.sort_unstable();
        // XOR semantics: drop pairs.
        let mut out = Vec::with_capacity(v.len());
        let mut i = 0;
        while i < v.len() {
            if i + 1 < v.len() && v[i] == v[i + 1] {
                i += 2;
            } else {
                out.push(v[i]);
                i += 1;
            }
        }
        AncestrySet(out)
    }
}

/// Single-qubit Pauli label used by sparse constructors.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Pauli {
    X,
    Y,
    Z,
}

/// A bit-packed Pauli operator: `i^phase * prod X^x Z^z`, plus ancestry.
///
/// `phase` is a power of i, mod 4. A row is Hermitian iff
/// `phase ≡ #{q : x_q = z_q = 1} (mod 2)`; Hermitian rows have sign
/// `(-1)^{(phase - y_count)/2}` times the proper Pauli (with Y's).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PauliRow {
    pub x: Vec<u64>,
    pub z: Vec<u64>,
    pub phase: u8,
    pub ancestry: AncestrySet,
}

#[inline]
fn get_bit(words: &[u64], idx: usize) -> bool {
    (words[idx >> 6] >> (idx & 63)) & 1 != 0
}

#[inline]
fn set_bit(words: &mut [u64], idx: usize, val: bool) {
    let w = &mut words[idx >> 6];
    if val {
        *w |= 1 << (idx & 63);
    } else {
        *w &= !(1 << (idx & 63));
    }
}

impl PauliRow {
    pub fn identity(words: usize) -> Self {
        PauliRow {
            x: vec![0; words],
            z: vec![0; words],
            phase: 0,
            ancestry: AncestrySet::new(),
        }
    }

    pub fn words(&self) -> usize {
        self.x.len()
    }

    pub fn x_bit(&self, q: usize) -> bool {
        get_bit(&self.x, q)
    }

    pub fn z_bit(&self, q: usize) -> bool {
        get_bit(&self.z, q)
    }

    pub fn set_x(&mut self, q: usize, v: bool) {
        set_bit(&mut self.x, q, v);
    }

    pub fn set_z(&mut self, q: usize, v: bool) {
        set_bit(&mut self.z, q, v);
    }

    /// Set qubit `q` to the given Pauli (assumes it was identity there).
    /// Y is encoded as x=z=1 with phase += 1 (Y = i·XZ).
    pub fn set_pauli(&mut self, q: usize, p: Pauli) {
        match p {
            Pauli::X => self.set_x(q, true),
            Pauli::Z => self.set_z(q, true),
            Pauli::Y => {
                self.set_x(q, true);
                self.set_z(q, true);
                self.phase = (self.phase + 1) & 3;
            }
        }
    }

    pub fn is_identity(&self) -> bool {
        self.x.iter().all(|&w| w == 0) && self.z.iter().all(|&w| w == 0)
    }

    /// True iff the two operators anticommute.
    pub fn anticommutes(&self, other: &PauliRow) -> bool {
        let mut acc = 0u32;
        for i in 0..self.x.len() {
            acc ^= (self.x[i] & other.z[i]).count_ones() ^ (self.z[i] & other.x[i]).count_ones();
        }
        acc & 1 != 0
    }

    /// Multiply `src` into `self`: self ← self · src (operator product).
    /// Phase picks up 2·|{q : z_self ∧ x_src}| from commuting Z past X.
    pub fn mul_assign(&mut self, src: &PauliRow) {
        let mut cross = 0u32;
        for i in 0..self.x.len() {
            cross ^= (self.z[i] & src.x[i]).count_ones() & 1;
            self.x[i] ^= src.x[i];
            self.z[i] ^= src.z[i];
        }
        self.phase = (self.phase + src.phase + 2 * (cross as u8)) & 3;
        self.ancestry.xor_with(&src.ancestry);
    }

    /// Number of qubits where both x and z are set (Y positions).
    pub fn y_count(&self) -> u32 {
        self.x
            .iter()
            .zip(self.z.iter())
            .map(|(a, b)| (a & b).count_ones())
            .sum()
    }

    /// For a Hermitian row, the sign bit: 0 for +, 1 for −.
    /// Panics in debug builds if the row is not Hermitian.
    pub fn sign_bit(&self) -> u8 {
        let y = self.y_count() as u8;
        debug_assert_eq!(
            (self.phase + y) & 1,
            0,
            "sign_bit on non-Hermitian Pauli row"
        );
        ((self.phase.wrapping_sub(y & 3)) >> 1) & 1
    }

    /// Indices of qubits with non-identity support.
    pub fn support(&self) -> Vec<usize> {
        let mut out = Vec::new();
        for w in 0..self.x.len() {
            let mut bits = self.x[w] | self.z[w];
            while bits != 0 {
                let b = bits.trailing_zeros() as usize;
                out.push((w << 6) + b);
                bits &= bits - 1;
            }
        }
        out
    }

    /// Grow the row to `words` 64-bit words (new qubits = identity).
    pub fn resize(&mut self, words: usize) {
        self.x.resize(words, 0);
        self.z.resize(words, 0);
    }

    /// Move the Pauli at column `from` to column `to` (used by column
    /// compaction; `to` must currently be identity).
    pub fn move_column(&mut self, from: usize, to: usize) {
        debug_assert!(!self.x_bit(to) && !self.z_bit(to));
        let xv = self.x_bit(from);
        let zv = self.z_bit(from);
        self.set_x(from, false);
        self.set_z(from, false);
        self.set_x(to, xv);
        self.set_z(to, zv);
    }
}

/// Sparse constructor for measurement targets and logical strings.
#[derive(Debug, Clone, Default)]
pub struct SparsePauli {
    pub terms: Vec<(usize, Pauli)>,
    /// Extra sign: true means an explicit leading minus.
    pub negated: bool,
}

impl SparsePauli {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, q: usize, p: Pauli) -> Self {
        self.terms.push((q, p));
        self
    }

    pub fn negate(mut self) -> Self {
        self.negated = !self.negated;
        self
    }

    pub fn to_row(&self, words: usize) -> PauliRow {
        let mut row = PauliRow::identity(words);
        for &(q, p) in &self.terms {
            debug_assert!(!row.x_bit(q) && !row.z_bit(q), "duplicate qubit in SparsePauli");
            row.set_pauli(q, p);
        }
        if self.negated {
            row.phase = (row.phase + 2) & 3;
        }
        row
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ancestry_xor() {
        let mut a: AncestrySet = [1, 3, 5].into_iter().collect();
        let b: AncestrySet = [3, 4].into_iter().collect();
        a.xor_with(&b);
        assert_eq!(a.as_slice(), &[1, 4, 5]);
        a.xor_index(4);
        assert_eq!(a.as_slice(), &[1, 5]);
        a.xor_index(2);
        assert_eq!(a.as_slice(), &[1, 2, 5]);
    }

    #[test]
    fn pauli_products() {
        // X · Z = -i Y  →  phase of (x=1,z=1) encoding: X·Z has phase 0+0+0 = 0
        // and encodes XZ = -iY; Y itself is phase 1. So X·Z = phase 0 = -iY. ✓
        let words = 1;
        let x = SparsePauli::new().with(0, Pauli::X).to_row(words);
        let z = SparsePauli::new().with(0, Pauli::Z).to_row(words);
        let y = SparsePauli::new().with(0, Pauli::Y).to_row(words);

        let mut xz = x.clone();
        xz.mul_assign(&z);
        // xz = X·Z: x=1,z=1,phase=0. Y = i·XZ so XZ = -i·Y → phase(Y)-1 = 0 ✓
        assert!(xz.x_bit(0) && xz.z_bit(0));
        assert_eq!(xz.phase, 0);

        let mut zx = z.clone();
        zx.mul_assign(&x);
        // Z·X = +i·Y: phase = 0+0+2·1 = 2; Y encoding phase 1, so Z·X = i^2·XZ = -XZ = iY ✓
        assert_eq!(zx.phase, 2);

        // Y·Y = I
        let mut yy = y.clone();
        yy.mul_assign(&y);
        assert!(yy.is_identity());
        assert_eq!(yy.phase, 0, "Y·Y must be +I");

        // X·Y = iZ ; check via Hermiticity helper on Z-part
        let mut xy = x.clone();
        xy.mul_assign(&y);
        assert!(!xy.x_bit(0) && xy.z_bit(0));
        assert_eq!(xy.phase, 1); // X·(iXZ) = i·(X·X)·Z ... X·XZ: phase 1 + 2·0 = 1 → i·Z ✓
    }

    #[test]
    fn anticommutation() {
        let words = 1;
        let x0 = SparsePauli::new().with(0, Pauli::X).to_row(words);
        let z0 = SparsePauli::new().with(0, Pauli::Z).to_row(words);
        let y0 = SparsePauli::new().with(0, Pauli::Y).to_row(words);
        let xx = SparsePauli::new()
            .with(0, Pauli::X)
            .with(1, Pauli::X)
            .to_row(words);
        let zz = SparsePauli::new()
            .with(0, Pauli::Z)
            .with(1, Pauli::Z)
            .to_row(words);
        assert!(x0.anticommutes(&z0));
        assert!(x0.anticommutes(&y0));
        assert!(z0.anticommutes(&y0));
        assert!(!xx.anticommutes(&zz));
        assert!(xx.anticommutes(&z0));
    }

    #[test]
    fn sign_bits() {
        let words = 1;
        let mut mz = SparsePauli::new().with(0, Pauli::Z).negate().to_row(words);
        assert_eq!(mz.sign_bit(), 1);
        mz.phase = (mz.phase + 2) & 3;
        assert_eq!(mz.sign_bit(), 0);
        let y = SparsePauli::new().with(0, Pauli::Y).to_row(words);
        assert_eq!(y.sign_bit(), 0);
        let my = SparsePauli::new().with(0, Pauli::Y).negate().to_row(words);
        assert_eq!(my.sign_bit(), 1);
    }
}
