//! CSS code construction: bivariate bicycle codes and rotated surface codes.

use serde::{Deserialize, Serialize};

use crate::error::CodeError;
use crate::gf2::{BitMatrix, BitVector, RowReducer};

/// A monomial `x^i y^j`, exponents reduced into `0..ell` and `0..m`.
pub type Monomial = (usize, usize);

/// Polynomial data of a bivariate bicycle code.
///
/// `new` builds `A = 1 + y + x^a y^b` and `B = 1 + x + x^c y^d`; with this placement of
/// the unit monomials the standard `(a, b, c, d)` tables give the expected `k`. The
/// toric override `A = 1 + x`, `B = 1 + y` has no third term.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BBSpec {
    pub ell: usize,
    pub m: usize,
    pub a_terms: Vec<Monomial>,
    pub b_terms: Vec<Monomial>,
}

fn reduce(e: i64, modulus: usize) -> usize {
    e.rem_euclid(modulus as i64) as usize
}

fn monomial_name((i, j): Monomial) -> String {
    match (i, j) {
        (0, 0) => "1".to_string(),
        (i, 0) => format!("x^{i}"),
        (0, j) => format!("y^{j}"),
        (i, j) => format!("x^{i}y^{j}"),
    }
}

impl BBSpec {
    pub fn new(ell: usize, m: usize, a: i64, b: i64, c: i64, d: i64) -> Result<Self, CodeError> {
        if ell < 2 || m < 2 {
            return Err(CodeError::TorusTooSmall { ell, m });
        }
        let a_terms = vec![(0, 0), (0, 1), (reduce(a, ell), reduce(b, m))];
        let b_terms = vec![(0, 0), (1, 0), (reduce(c, ell), reduce(d, m))];
        let spec = BBSpec { ell, m, a_terms, b_terms };
        spec.validate()?;
        Ok(spec)
    }

    /// `A = 1 + x`, `B = 1 + y`: the toric code on an `ell x m` torus.
    pub fn toric(ell: usize, m: usize) -> Result<Self, CodeError> {
        if ell < 2 || m < 2 {
            return Err(CodeError::TorusTooSmall { ell, m });
        }
        let spec = BBSpec { ell, m, a_terms: vec![(0, 0), (1, 0)], b_terms: vec![(0, 0), (0, 1)] };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<(), CodeError> {
        if self.ell < 2 || self.m < 2 {
            return Err(CodeError::TorusTooSmall { ell: self.ell, m: self.m });
        }
        for (poly, terms) in [('A', &self.a_terms), ('B', &self.b_terms)] {
            if !(2..=3).contains(&terms.len()) {
                return Err(CodeError::TermCount { poly, expected: "2 or 3", got: terms.len() });
            }
            for (i, &s) in terms.iter().enumerate() {
                for &t in &terms[i + 1..] {
                    let s = (s.0 % self.ell, s.1 % self.m);
                    let t = (t.0 % self.ell, t.1 % self.m);
                    if s == t {
                        return Err(CodeError::CollidingMonomials {
                            poly,
                            first: monomial_name(s),
                            second: monomial_name(t),
                        });
                    }
                }
            }
        }
        Ok(())
    }

    /// Well-known instances by short name (`bb72`, `bb90`, `bb98`, `bb108`, `bb144`).
    pub fn named(name: &str) -> Option<BBSpec> {
        let (ell, m, a, b, c, d) = match name {
            "bb72" => (6, 6, 3, -1, -1, 3),
            "bb90" => (3, 15, 0, 5, -1, 3),
            "bb98" => (7, 7, 1, -3, -3, 1),
            "bb108" => (9, 6, 3, -1, -1, 3),
            "bb144" => (12, 6, 3, -1, -1, 3),
            _ => return None,
        };
        BBSpec::new(ell, m, a, b, c, d).ok()
    }

    pub fn size(&self) -> usize {
        self.ell * self.m
    }

    /// Torus site index of `(i, j)`.
    pub fn site(&self, i: usize, j: usize) -> usize {
        (i % self.ell) * self.m + (j % self.m)
    }

    pub fn coords(&self, site: usize) -> (usize, usize) {
        (site / self.m, site % self.m)
    }

    /// `site + mono` on the torus.
    pub fn shift(&self, site: usize, mono: Monomial) -> usize {
        let (i, j) = self.coords(site);
        self.site(i + mono.0, j + mono.1)
    }

    /// `site - mono` on the torus.
    pub fn unshift(&self, site: usize, mono: Monomial) -> usize {
        let (i, j) = self.coords(site);
        self.site(i + self.ell - mono.0 % self.ell, j + self.m - mono.1 % self.m)
    }

    pub fn add(&self, p: Monomial, q: Monomial) -> Monomial {
        ((p.0 + q.0) % self.ell, (p.1 + q.1) % self.m)
    }

    pub fn neg(&self, p: Monomial) -> Monomial {
        ((self.ell - p.0 % self.ell) % self.ell, (self.m - p.1 % self.m) % self.m)
    }

    pub fn monomial_name(&self, p: Monomial) -> String {
        monomial_name(p)
    }

    pub fn describe(&self) -> String {
        let poly = |t: &[Monomial]| t.iter().map(|&p| monomial_name(p)).collect::<Vec<_>>().join("+");
        format!("l={} m={} A={} B={}", self.ell, self.m, poly(&self.a_terms), poly(&self.b_terms))
    }
}

/// `(S_ell)^i (x) (S_m)^j`, with `x^p y^q` sending row `(r, s)` to column `(r+p, s+q)`.
pub fn monomial_matrix(spec: &BBSpec, i: i64, j: i64) -> BitMatrix {
    let n = spec.size();
    let mono = (reduce(i, spec.ell), reduce(j, spec.m));
    let mut out = BitMatrix::zeros(n, n);
    for r in 0..n {
        out.set(r, spec.shift(r, mono), true);
    }
    out
}

fn polynomial_matrix(spec: &BBSpec, terms: &[Monomial]) -> BitMatrix {
    let n = spec.size();
    let mut out = BitMatrix::zeros(n, n);
    for r in 0..n {
        for &t in terms {
            out.toggle(r, spec.shift(r, t));
        }
    }
    out
}

/// The circulant pair `(A, B)`.
pub fn bb_polynomials(spec: &BBSpec) -> (BitMatrix, BitMatrix) {
    (polynomial_matrix(spec, &spec.a_terms), polynomial_matrix(spec, &spec.b_terms))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum QubitRole {
    DataLeft,
    DataRight,
    Data,
    XAncilla,
    ZAncilla,
}

/// A check of the rotated surface code, as a plaquette on the dual lattice.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Plaquette {
    /// Column and row of the plaquette corner, in `0..=d`.
    pub a: usize,
    pub b: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum CodeFamily {
    BivariateBicycle(BBSpec),
    RotatedSurface { distance: usize, x_checks: Vec<Plaquette>, z_checks: Vec<Plaquette> },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CssCode {
    pub n: usize,
    pub k: usize,
    pub hx: BitMatrix,
    pub hz: BitMatrix,
    pub logical_x: BitMatrix,
    pub logical_z: BitMatrix,
    pub family: CodeFamily,
}

impl CssCode {
    /// Assembles a code from its check matrices, computing `k` and a symplectic
    /// logical basis.
    pub fn from_checks(hx: BitMatrix, hz: BitMatrix, family: CodeFamily) -> Result<Self, CodeError> {
        let k = compute_k(&hx, &hz)?;
        let (logical_x, logical_z) = logical_basis(&hx, &hz);
        debug_assert_eq!(logical_x.rows(), k);
        Ok(CssCode { n: hx.cols(), k, hx, hz, logical_x, logical_z, family })
    }

    pub fn name(&self) -> String {
        match &self.family {
            CodeFamily::BivariateBicycle(_) => format!("bb{}", self.n),
            CodeFamily::RotatedSurface { distance, .. } => format!("surface{distance}"),
        }
    }

    pub fn bb_spec(&self) -> Option<&BBSpec> {
        match &self.family {
            CodeFamily::BivariateBicycle(s) => Some(s),
            _ => None,
        }
    }

    pub fn data_role(&self, q: usize) -> QubitRole {
        match &self.family {
            CodeFamily::BivariateBicycle(s) if q < s.size() => QubitRole::DataLeft,
            CodeFamily::BivariateBicycle(_) => QubitRole::DataRight,
            CodeFamily::RotatedSurface { .. } => QubitRole::Data,
        }
    }

    /// Role of every data qubit followed by the X and Z check ancillas, in order.
    pub fn qubit_labels(&self) -> Vec<QubitRole> {
        let mut out: Vec<QubitRole> = (0..self.n).map(|q| self.data_role(q)).collect();
        out.extend(std::iter::repeat(QubitRole::XAncilla).take(self.hx.rows()));
        out.extend(std::iter::repeat(QubitRole::ZAncilla).take(self.hz.rows()));
        out
    }

    /// Exact distance by exhaustive support enumeration; `None` if it exceeds `max_weight`.
    pub fn distance_exhaustive(&self, max_weight: usize) -> Option<usize> {
        let dz = self.hx.min_weight_in_coset_exhaustive(&self.hz, max_weight);
        let dx = self.hz.min_weight_in_coset_exhaustive(&self.hx, max_weight);
        match (dz, dx) {
            (Some(a), Some(b)) => Some(a.min(b)),
            (Some(a), None) | (None, Some(a)) => Some(a),
            (None, None) => None,
        }
    }

    /// Text export: a JSON header comment followed by the four matrices.
    pub fn to_text(&self) -> String {
        let header = serde_json::json!({
            "name": self.name(),
            "n": self.n,
            "k": self.k,
            "family": self.family,
            "labels": self.qubit_labels(),
        });
        let mut s = format!("# {header}\n");
        for (name, m) in [("hx", &self.hx), ("hz", &self.hz), ("logical_x", &self.logical_x), ("logical_z", &self.logical_z)] {
            s.push_str(&format!("# {name}\n"));
            s.push_str(&m.to_text());
        }
        s
    }
}

/// `n - rank(hx) - rank(hz)`, after checking that the stabilizers commute.
pub fn compute_k(hx: &BitMatrix, hz: &BitMatrix) -> Result<usize, CodeError> {
    if hx.cols() != hz.cols() || !hx.mul(&hz.transpose()).is_zero() {
        return Err(CodeError::NonCommuting);
    }
    Ok(hx.cols() - hx.rank() - hz.rank())
}

/// `2 dim(ker A ∩ ker B)`.
pub fn bb_kernel_k(spec: &BBSpec) -> usize {
    let (a, b) = bb_polynomials(spec);
    2 * a.vstack(&b).kernel_basis().rows()
}

/// Representatives of `ker(m)` modulo `rowspace(exclude)`, in kernel-basis order.
fn kernel_complement(m: &BitMatrix, exclude: &BitMatrix) -> Vec<BitVector> {
    let mut span = RowReducer::new(exclude);
    m.kernel_basis().row_vectors().into_iter().filter(|v| span.push(v)).collect()
}

/// Logical X and Z bases with `logical_x * logical_z^T = I`.
pub fn logical_basis(hx: &BitMatrix, hz: &BitMatrix) -> (BitMatrix, BitMatrix) {
    let n = hx.cols();
    let mut xs = kernel_complement(hz, hx);
    let mut zs = kernel_complement(hx, hz);
    let mut out_x = Vec::new();
    let mut out_z = Vec::new();
    // symplectic Gram-Schmidt
    while let Some(x) = xs.first().cloned() {
        xs.remove(0);
        let Some(pos) = zs.iter().position(|z| x.dot(z)) else {
            unreachable!("logical X has no partner; check matrices are inconsistent");
        };
        let z = zs.remove(pos);
        for other in xs.iter_mut() {
            if other.dot(&z) {
                other.xor_assign(&x);
            }
        }
        for other in zs.iter_mut() {
            if x.dot(other) {
                other.xor_assign(&z);
            }
        }
        out_x.push(x);
        out_z.push(z);
    }
    (BitMatrix::from_rows_with_cols(&out_x, n), BitMatrix::from_rows_with_cols(&out_z, n))
}

/// `H_X = [A | B]`, `H_Z = [B^T | A^T]`.
pub fn build_bb_code(spec: &BBSpec) -> Result<CssCode, CodeError> {
    spec.validate()?;
    let (a, b) = bb_polynomials(spec);
    let hx = a.hstack(&b);
    let hz = b.transpose().hstack(&a.transpose());
    let code = CssCode::from_checks(hx, hz, CodeFamily::BivariateBicycle(spec.clone()))?;
    debug_assert_eq!(code.k, bb_kernel_k(spec));
    Ok(code)
}

/// Data qubit index of column `c`, row `r` in a distance-`d` patch.
pub fn surface_data_index(d: usize, c: usize, r: usize) -> usize {
    r * d + c
}

/// Plaquettes of the rotated surface code, split by type.
///
/// Plaquette `(a, b)` touches data columns `a-1, a` and rows `b-1, b`. Z checks have
/// `a + b` odd; weight-2 Z checks sit on the top and bottom edges, weight-2 X checks on
/// the left and right edges.
pub fn surface_plaquettes(d: usize) -> (Vec<Plaquette>, Vec<Plaquette>) {
    let mut xs = Vec::new();
    let mut zs = Vec::new();
    for b in 0..=d {
        for a in 0..=d {
            let is_z = (a + b) % 2 == 1;
            let bulk = (1..d).contains(&a) && (1..d).contains(&b);
            let top_bottom = (b == 0 || b == d) && (1..d).contains(&a);
            let left_right = (a == 0 || a == d) && (1..d).contains(&b);
            let keep = bulk || (top_bottom && is_z) || (left_right && !is_z);
            if keep {
                if is_z {
                    zs.push(Plaquette { a, b });
                } else {
                    xs.push(Plaquette { a, b });
                }
            }
        }
    }
    (xs, zs)
}

/// Data corners of a plaquette as `[TL, TR, BL, BR]`, `None` where off the patch.
pub fn plaquette_corners(d: usize, p: Plaquette) -> [Option<usize>; 4] {
    let at = |c: isize, r: isize| {
        if c >= 0 && r >= 0 && (c as usize) < d && (r as usize) < d {
            Some(surface_data_index(d, c as usize, r as usize))
        } else {
            None
        }
    };
    let (a, b) = (p.a as isize, p.b as isize);
    [at(a - 1, b - 1), at(a, b - 1), at(a - 1, b), at(a, b)]
}

pub fn build_rotated_surface(distance: usize) -> Result<CssCode, CodeError> {
    if distance < 3 || distance % 2 == 0 {
        return Err(CodeError::BadSurfaceDistance(distance));
    }
    let d = distance;
    let n = d * d;
    let (xs, zs) = surface_plaquettes(d);
    let to_matrix = |ps: &[Plaquette]| {
        let rows: Vec<BitVector> = ps
            .iter()
            .map(|&p| BitVector::from_indices(n, plaquette_corners(d, p).into_iter().flatten()))
            .collect();
        BitMatrix::from_rows_with_cols(&rows, n)
    };
    let hx = to_matrix(&xs);
    let hz = to_matrix(&zs);
    let k = compute_k(&hx, &hz)?;
    // X along the top row, Z down the left column
    let lx = BitVector::from_indices(n, (0..d).map(|c| surface_data_index(d, c, 0)));
    let lz = BitVector::from_indices(n, (0..d).map(|r| surface_data_index(d, 0, r)));
    Ok(CssCode {
        n,
        k,
        hx,
        hz,
        logical_x: BitMatrix::from_rows(&[lx]),
        logical_z: BitMatrix::from_rows(&[lz]),
        family: CodeFamily::RotatedSurface { distance, x_checks: xs, z_checks: zs },
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn assert_logicals_valid(code: &CssCode) {
        assert_eq!(code.logical_x.rows(), code.k);
        assert_eq!(code.logical_z.rows(), code.k);
        assert!(code.hz.mul(&code.logical_x.transpose()).is_zero());
        assert!(code.hx.mul(&code.logical_z.transpose()).is_zero());
        assert_eq!(code.logical_x.mul(&code.logical_z.transpose()), BitMatrix::identity(code.k));
    }

    #[test]
    fn monomial_identities() {
        let spec = BBSpec::new(3, 5, 1, 1, 1, 1).unwrap();
        assert_eq!(monomial_matrix(&spec, 0, 0), BitMatrix::identity(15));
        assert_eq!(monomial_matrix(&spec, 3, 0), BitMatrix::identity(15));
        assert_eq!(monomial_matrix(&spec, 0, -5), BitMatrix::identity(15));
        let x = monomial_matrix(&spec, 1, 0);
        let y = monomial_matrix(&spec, 0, 1);
        assert_eq!(x.mul(&y), y.mul(&x));
        assert_eq!(x.mul(&y), monomial_matrix(&spec, 1, 1));
    }

    #[test]
    fn monomial_is_kronecker_product() {
        let spec = BBSpec::new(3, 4, 1, 1, 1, 1).unwrap();
        let m = monomial_matrix(&spec, 2, 3);
        // entry-wise (S_3)^2 (x) (S_4)^3
        for r in 0..12 {
            for c in 0..12 {
                let (r1, r2) = (r / 4, r % 4);
                let (c1, c2) = (c / 4, c % 4);
                let expect = c1 == (r1 + 2) % 3 && c2 == (r2 + 3) % 4;
                assert_eq!(m.get(r, c), expect);
            }
        }
    }

    #[test]
    fn known_bb_parameters() {
        for (name, n, k) in [("bb72", 72, 12), ("bb90", 90, 8), ("bb98", 98, 6), ("bb108", 108, 8), ("bb144", 144, 12)] {
            let spec = BBSpec::named(name).unwrap();
            let code = build_bb_code(&spec).unwrap();
            assert_eq!((code.n, code.k), (n, k), "{name}");
            assert_eq!(bb_kernel_k(&spec), k);
            for r in 0..code.hx.rows() {
                assert_eq!(code.hx.row_weight(r), 6);
                assert_eq!(code.hz.row_weight(r), 6);
            }
            assert_logicals_valid(&code);
        }
    }

    #[test]
    fn bb72_ranks() {
        let code = build_bb_code(&BBSpec::named("bb72").unwrap()).unwrap();
        assert_eq!(code.hx.rank(), 30);
        let (a, b) = bb_polynomials(code.bb_spec().unwrap());
        assert_eq!(a.vstack(&b).kernel_basis().rows(), 6);
    }

    #[test]
    fn toric_reduction() {
        let spec = BBSpec::toric(3, 3).unwrap();
        let code = build_bb_code(&spec).unwrap();
        assert_eq!((code.n, code.k), (18, 2));
        assert_eq!(code.distance_exhaustive(4), Some(3));
        assert_logicals_valid(&code);
    }

    #[test]
    fn colliding_terms_rejected() {
        // x^0 y^1 collides with the y term of A
        let err = BBSpec::new(6, 6, 0, 1, 2, 2).unwrap_err();
        assert!(matches!(err, CodeError::CollidingMonomials { poly: 'A', .. }));
        let err = BBSpec::new(6, 6, 2, 2, 0, 6).unwrap_err();
        assert!(matches!(err, CodeError::CollidingMonomials { poly: 'B', .. }));
        assert!(BBSpec::new(1, 6, 2, 2, 2, 2).is_err());
    }

    #[test]
    fn surface_parameters() {
        for d in [3, 5, 7] {
            let code = build_rotated_surface(d).unwrap();
            assert_eq!((code.n, code.k), (d * d, 1));
            assert_eq!(code.hx.rows(), (d * d - 1) / 2);
            assert_eq!(code.hz.rows(), (d * d - 1) / 2);
            for m in [&code.hx, &code.hz] {
                for r in 0..m.rows() {
                    assert!(matches!(m.row_weight(r), 2 | 4));
                }
            }
            assert_logicals_valid(&code);
        }
        assert_eq!(build_rotated_surface(3).unwrap().distance_exhaustive(4), Some(3));
        assert!(build_rotated_surface(4).is_err());
    }

    #[test]
    fn surface_boundary_types() {
        let (xs, zs) = surface_plaquettes(5);
        for p in &zs {
            if p.b == 0 || p.b == 5 {
                assert!((1..5).contains(&p.a));
            }
            assert!(p.a != 0 && p.a != 5);
        }
        for p in &xs {
            assert!(p.b != 0 && p.b != 5);
        }
    }

    #[test]
    fn export_has_header() {
        let code = build_rotated_surface(3).unwrap();
        let text = code.to_text();
        assert!(text.starts_with("# {"));
        assert!(text.contains("\"k\":1"));
    }
}
