//! Operator algebra on `span{1, x, p, p^2, p^3, p^4}`.
//!
//! The space is closed under commutation because every bracket that survives
//! has exactly one `x`-bearing argument: `[x, p^n] = i hbar n p^(n-1)` and all
//! functions of `p` commute. Nested brackets strictly lower the `p` degree, so
//! every adjoint series terminates.

use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::PhysicalParams;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

/// Basis monomials of the algebra.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Basis {
    One,
    X,
    /// `p^k` with `1 <= k <= 4`.
    P(usize),
}

impl Basis {
    pub const ALL: [Basis; 6] = [
        Basis::P(4),
        Basis::P(3),
        Basis::P(2),
        Basis::P(1),
        Basis::X,
        Basis::One,
    ];

    pub fn label(self) -> &'static str {
        match self {
            Basis::One => "1",
            Basis::X => "x",
            Basis::P(1) => "p",
            Basis::P(2) => "p^2",
            Basis::P(3) => "p^3",
            Basis::P(4) => "p^4",
            Basis::P(_) => unreachable!("p degree outside 1..=4"),
        }
    }
}

/// `c0 + cx x + sum_k cp[k-1] p^k` with complex coefficients.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct AlgebraElement {
    pub c0: Complex64,
    pub cx: Complex64,
    pub cp: [Complex64; 4],
}

impl AlgebraElement {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn identity(c: Complex64) -> Self {
        Self { c0: c, ..Self::default() }
    }

    pub fn x(c: Complex64) -> Self {
        Self { cx: c, ..Self::default() }
    }

    /// `c p^k`, `k` in `1..=4`.
    pub fn p_power(k: usize, c: Complex64) -> Self {
        assert!((1..=4).contains(&k), "p power {k} outside the algebra");
        let mut e = Self::default();
        e.cp[k - 1] = c;
        e
    }

    pub fn basis(b: Basis) -> Self {
        Self::zero().with(b, Complex64::new(1.0, 0.0))
    }

    /// Kinetic energy `p^4 / 8 eta^3 + p^2 / 2 mu`.
    pub fn kinetic(params: &PhysicalParams) -> Self {
        Self::p_power(4, params.quartic().into()) + Self::p_power(2, params.quadratic().into())
    }

    pub fn get(&self, b: Basis) -> Complex64 {
        match b {
            Basis::One => self.c0,
            Basis::X => self.cx,
            Basis::P(k) => self.cp[k - 1],
        }
    }

    pub fn with(mut self, b: Basis, c: Complex64) -> Self {
        match b {
            Basis::One => self.c0 = c,
            Basis::X => self.cx = c,
            Basis::P(k) => self.cp[k - 1] = c,
        }
        self
    }

    pub fn is_zero(&self) -> bool {
        Basis::ALL.iter().all(|&b| self.get(b) == ZERO)
    }

    /// True when the element carries no `x` term.
    pub fn is_x_free(&self) -> bool {
        self.cx == ZERO
    }

    /// Hermitian iff every coefficient is real.
    pub fn is_hermitian(&self, tol: f64) -> bool {
        Basis::ALL.iter().all(|&b| self.get(b).im.abs() <= tol)
    }

    pub fn max_abs(&self) -> f64 {
        Basis::ALL
            .iter()
            .map(|&b| self.get(b).norm())
            .fold(0.0, f64::max)
    }

    pub fn map(&self, f: impl Fn(Complex64) -> Complex64) -> Self {
        Self {
            c0: f(self.c0),
            cx: f(self.cx),
            cp: self.cp.map(f),
        }
    }
}

impl Add for AlgebraElement {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        Self {
            c0: self.c0 + rhs.c0,
            cx: self.cx + rhs.cx,
            cp: std::array::from_fn(|k| self.cp[k] + rhs.cp[k]),
        }
    }
}

impl AddAssign for AlgebraElement {
    fn add_assign(&mut self, rhs: Self) {
        *self = *self + rhs;
    }
}

impl Sub for AlgebraElement {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        self + (-rhs)
    }
}

impl Neg for AlgebraElement {
    type Output = Self;
    fn neg(self) -> Self {
        self.map(|c| -c)
    }
}

impl Mul<AlgebraElement> for Complex64 {
    type Output = AlgebraElement;
    fn mul(self, rhs: AlgebraElement) -> AlgebraElement {
        rhs.map(|c| self * c)
    }
}

impl Mul<AlgebraElement> for f64 {
    type Output = AlgebraElement;
    fn mul(self, rhs: AlgebraElement) -> AlgebraElement {
        rhs.map(|c| self * c)
    }
}

impl fmt::Display for AlgebraElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for b in Basis::ALL {
            let c = self.get(b);
            if c == ZERO {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "{}", format_coeff(c))?;
            if b != Basis::One {
                write!(f, "*{}", b.label())?;
            }
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}

/// `[a, b] = ab - ba`, reduced by `[x, p^n] = i hbar n p^(n-1)`.
pub fn commutator(a: &AlgebraElement, b: &AlgebraElement, hbar: f64) -> AlgebraElement {
    let mut out = AlgebraElement::zero();
    for n in 1..=4 {
        let weight = a.cx * b.cp[n - 1] - b.cx * a.cp[n - 1];
        if weight == ZERO {
            continue;
        }
        let c = weight * I * (hbar * n as f64);
        if n == 1 {
            out.c0 += c;
        } else {
            out.cp[n - 2] += c;
        }
    }
    out
}

/// `e^P target e^-P` for x-free `P`, summed as the terminating adjoint series.
pub fn conjugate_by_p_exponential(
    exponent: &AlgebraElement,
    target: &AlgebraElement,
    hbar: f64,
) -> Result<AlgebraElement> {
    if !exponent.is_x_free() {
        return Err(Error::NotXFree {
            cx: format_coeff(exponent.cx),
        });
    }
    let mut sum = *target;
    let mut term = *target;
    // ad_P lowers the x-degree by one, so at most one correction survives.
    for order in 1..=2 {
        term = (1.0 / order as f64) * commutator(exponent, &term, hbar);
        if term.is_zero() {
            break;
        }
        sum += term;
    }
    Ok(sum)
}

/// A product of symbols with a complex prefactor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Term {
    pub coeff: Complex64,
    pub monomial: Vec<String>,
}

/// Right-hand side of one first-order equation, `symbol = sum of terms`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Row {
    pub symbol: String,
    pub terms: Vec<Term>,
}

impl Row {
    /// Renders the polynomial, e.g. `4*A*f + (-1)*E`.
    pub fn expression(&self) -> String {
        if self.terms.is_empty() {
            return "0".to_string();
        }
        self.terms
            .iter()
            .map(|t| {
                let mut s = format_coeff(t.coeff);
                for m in &t.monomial {
                    s.push('*');
                    s.push_str(m);
                }
                s
            })
            .collect::<Vec<_>>()
            .join(" + ")
    }

    pub fn coefficient_of(&self, monomial: &[&str]) -> Complex64 {
        self.terms
            .iter()
            .filter(|t| t.monomial.iter().map(String::as_str).eq(monomial.iter().copied()))
            .map(|t| t.coeff)
            .sum()
    }
}

/// A first-order ODE system `d(state)/dt = rows`, polynomial in the state and `f`.
///
/// Physical parameters are folded into the numeric coefficients.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstraintTable {
    pub state: Vec<String>,
    pub rows: Vec<Row>,
}

/// Symbol standing for the drive strength `f(t)` inside monomials.
pub const DRIVE: &str = "f";

type Poly = Vec<Term>;

impl ConstraintTable {
    pub fn row(&self, symbol: &str) -> Option<&Row> {
        self.rows.iter().find(|r| r.symbol == symbol)
    }

    /// Lowers the table to index form for repeated evaluation.
    pub fn compile(&self) -> Result<CompiledTable> {
        let mut rows = Vec::with_capacity(self.state.len());
        for name in &self.state {
            let symbol = format!("{name}dot");
            let row = self
                .row(&symbol)
                .ok_or_else(|| Error::UnknownSymbol(symbol.clone()))?;
            let mut terms = Vec::with_capacity(row.terms.len());
            for t in &row.terms {
                let mut factors = Vec::new();
                let mut drive_power = 0;
                for m in &t.monomial {
                    if m == DRIVE {
                        drive_power += 1;
                    } else {
                        let idx = self
                            .state
                            .iter()
                            .position(|s| s == m)
                            .ok_or_else(|| Error::UnknownSymbol(m.clone()))?;
                        factors.push(idx);
                    }
                }
                terms.push(CompiledTerm {
                    coeff: t.coeff,
                    factors,
                    drive_power,
                });
            }
            rows.push(terms);
        }
        for r in &self.rows {
            let known = self.state.iter().any(|s| format!("{s}dot") == r.symbol);
            if !known {
                return Err(Error::UnknownSymbol(r.symbol.clone()));
            }
        }
        Ok(CompiledTable { rows })
    }

    fn canonical(&self, mut poly: Poly) -> Poly {
        let rank = |m: &str| {
            self.state
                .iter()
                .position(|s| s == m)
                .unwrap_or(self.state.len())
        };
        for t in &mut poly {
            t.monomial.sort_by_key(|m| rank(m));
        }
        let mut merged: Poly = Vec::new();
        for t in poly {
            match merged.iter_mut().find(|m| m.monomial == t.monomial) {
                Some(m) => m.coeff += t.coeff,
                None => merged.push(t),
            }
        }
        merged.retain(|t| t.coeff != ZERO);
        merged.sort_by_key(|t| {
            (
                t.monomial.iter().map(|m| rank(m)).min().unwrap_or(usize::MAX),
                t.monomial.len(),
            )
        });
        merged
    }
}

#[derive(Debug, Clone)]
struct CompiledTerm {
    coeff: Complex64,
    factors: Vec<usize>,
    drive_power: i32,
}

/// Index form of a [`ConstraintTable`].
#[derive(Debug, Clone)]
pub struct CompiledTable {
    rows: Vec<Vec<CompiledTerm>>,
}

impl CompiledTable {
    pub fn dim(&self) -> usize {
        self.rows.len()
    }

    pub fn eval_into(&self, state: &[Complex64], drive: f64, out: &mut [Complex64]) {
        for (slot, terms) in out.iter_mut().zip(&self.rows) {
            *slot = terms
                .iter()
                .map(|t| {
                    t.factors
                        .iter()
                        .fold(t.coeff * drive.powi(t.drive_power), |acc, &i| acc * state[i])
                })
                .sum();
        }
    }

    pub fn eval(&self, state: &[Complex64], drive: f64) -> Vec<Complex64> {
        let mut out = vec![ZERO; self.rows.len()];
        self.eval_into(state, drive, &mut out);
        out
    }
}

fn term(coeff: Complex64, monomial: &[&str]) -> Term {
    Term {
        coeff,
        monomial: monomial.iter().map(|s| s.to_string()).collect(),
    }
}

fn poly_mul(a: &Poly, b: &Poly) -> Poly {
    let mut out = Vec::with_capacity(a.len() * b.len());
    for s in a {
        for t in b {
            let mut monomial = s.monomial.clone();
            monomial.extend(t.monomial.iter().cloned());
            out.push(Term {
                coeff: s.coeff * t.coeff,
                monomial,
            });
        }
    }
    out
}

/// State symbols of the invariant `A p^4 + B p^3 + C p^2 + D p + E x + F`.
pub const INVARIANT_STATE: [(&str, Basis); 6] = [
    ("A", Basis::P(4)),
    ("B", Basis::P(3)),
    ("C", Basis::P(2)),
    ("D", Basis::P(1)),
    ("E", Basis::X),
    ("F", Basis::One),
];

/// State symbols of the ordered product
/// `e^{g1 p^4} e^{g2 p^3} e^{g3 p^2} e^{g4 p} e^{g5 x} e^{g6}`.
pub const PROPAGATOR_STATE: [(&str, Basis); 6] = [
    ("gamma1", Basis::P(4)),
    ("gamma2", Basis::P(3)),
    ("gamma3", Basis::P(2)),
    ("gamma4", Basis::P(1)),
    ("gamma5", Basis::X),
    ("gamma6", Basis::One),
];

/// Split of `H(t) = H0 + f(t) H1`.
fn hamiltonian_parts(params: &PhysicalParams) -> (AlgebraElement, AlgebraElement) {
    (
        AlgebraElement::kinetic(params),
        AlgebraElement::x(Complex64::new(1.0, 0.0)),
    )
}

/// Collects `dI/dt = 0` with `dI/dt = dI/dt|explicit + [I, H] / (i hbar)`.
///
/// Each coefficient's time derivative equals the matching component of
/// `-[I, H] / (i hbar)`; the bracket is evaluated basis element by basis element
/// so every entry of the table comes out of [`commutator`].
pub fn derive_invariant_constraints(params: &PhysicalParams) -> ConstraintTable {
    let hbar = params.hbar;
    let (h0, h1) = hamiltonian_parts(params);
    let scale = -1.0 / (I * hbar);
    let state: Vec<String> = INVARIANT_STATE.iter().map(|(s, _)| s.to_string()).collect();
    let mut table = ConstraintTable {
        state,
        rows: Vec::new(),
    };
    for &(target, target_basis) in &INVARIANT_STATE {
        let mut poly = Vec::new();
        for &(source, source_basis) in &INVARIANT_STATE {
            let unit = AlgebraElement::basis(source_basis);
            let from_static = scale * commutator(&unit, &h0, hbar);
            let from_drive = scale * commutator(&unit, &h1, hbar);
            poly.push(term(from_static.get(target_basis), &[source]));
            poly.push(term(from_drive.get(target_basis), &[source, DRIVE]));
        }
        let terms = table.canonical(poly);
        table.rows.push(Row {
            symbol: format!("{target}dot"),
            terms,
        });
    }
    table
}

/// Matches `i hbar (dU/dt) U^-1` of the ordered exponential product against `H(t)`.
///
/// Only the `e^{g5 x}` factor is conjugated nontrivially: it picks up
/// `e^P x e^-P` with `P = g1 p^4 + g2 p^3 + g3 p^2 + g4 p`. The `x` row fixes
/// `g5'` first; every other row is then solved for its own derivative.
pub fn derive_propagator_constraints(params: &PhysicalParams) -> ConstraintTable {
    let hbar = params.hbar;
    let (h0, h1) = hamiltonian_parts(params);
    let inv_ihbar = 1.0 / (I * hbar);
    let x = AlgebraElement::x(Complex64::new(1.0, 0.0));

    // e^P x e^-P - x is linear in P; probe each p-generator separately.
    let shifts: Vec<(&str, AlgebraElement)> = PROPAGATOR_STATE
        .iter()
        .filter(|(_, b)| matches!(b, Basis::P(_)))
        .map(|&(name, b)| {
            let conj = conjugate_by_p_exponential(&AlgebraElement::basis(b), &x, hbar)
                .expect("p generators are x-free");
            (name, conj - x)
        })
        .collect();

    let state: Vec<String> = PROPAGATOR_STATE.iter().map(|(s, _)| s.to_string()).collect();
    let mut table = ConstraintTable {
        state,
        rows: Vec::new(),
    };

    // i hbar g5' = H[x]
    let g5_rate = table.canonical(vec![
        term(inv_ihbar * h0.get(Basis::X), &[]),
        term(inv_ihbar * h1.get(Basis::X), &[DRIVE]),
    ]);

    for &(name, basis) in &PROPAGATOR_STATE {
        let terms = if basis == Basis::X {
            g5_rate.clone()
        } else {
            // i hbar (g' + g5' * sum_i g_i shift_i[basis]) = H[basis]
            let mut poly = vec![
                term(inv_ihbar * h0.get(basis), &[]),
                term(inv_ihbar * h1.get(basis), &[DRIVE]),
            ];
            let carried: Poly = shifts
                .iter()
                .map(|(g, shift)| term(-shift.get(basis), &[g]))
                .collect();
            poly.extend(poly_mul(&g5_rate, &carried));
            table.canonical(poly)
        };
        table.rows.push(Row {
            symbol: format!("{name}dot"),
            terms,
        });
    }
    table
}

/// The invariant coefficient system in the literally printed integral form.
///
/// Its `B`, `C` and `D` rows disagree with [`derive_invariant_constraints`];
/// the undefined mass in the `D` row is read as the reduced mass.
pub fn literal_invariant_constraints(params: &PhysicalParams) -> ConstraintTable {
    let one = Complex64::new(1.0, 0.0);
    let rows = vec![
        ("Adot", vec![]),
        (
            "Bdot",
            vec![term(one, &["A", DRIVE]), term((0.5 / params.eta.powi(3)).into(), &["E"])],
        ),
        ("Cdot", vec![term((2.0).into(), &["B", DRIVE])]),
        (
            "Ddot",
            vec![term((2.0).into(), &["C", DRIVE]), term((1.0 / params.mu).into(), &["E"])],
        ),
        ("Edot", vec![]),
        ("Fdot", vec![term(one, &["D", DRIVE])]),
    ];
    build_table(&INVARIANT_STATE, rows)
}

/// The evolution-factor system in the literally printed integral form.
///
/// Its `gamma3` and `gamma6` rows disagree with [`derive_propagator_constraints`].
pub fn literal_propagator_constraints(params: &PhysicalParams) -> ConstraintTable {
    let hbar = params.hbar;
    let rows = vec![
        ("gamma1dot", vec![term(-I / (8.0 * hbar * params.eta.powi(3)), &[])]),
        ("gamma2dot", vec![term((4.0).into(), &[DRIVE, "gamma1"])]),
        (
            "gamma3dot",
            vec![
                term(-3.0 * I / hbar, &[DRIVE, "gamma2"]),
                term(-I / (2.0 * hbar * params.mu), &[]),
            ],
        ),
        ("gamma4dot", vec![term((2.0).into(), &[DRIVE, "gamma3"])]),
        ("gamma5dot", vec![term(-I / hbar, &[DRIVE])]),
        ("gamma6dot", vec![term(I * hbar, &["gamma4"])]),
    ];
    build_table(&PROPAGATOR_STATE, rows)
}

fn build_table(state: &[(&str, Basis)], rows: Vec<(&str, Vec<Term>)>) -> ConstraintTable {
    let mut table = ConstraintTable {
        state: state.iter().map(|(s, _)| s.to_string()).collect(),
        rows: Vec::new(),
    };
    for (symbol, terms) in rows {
        let terms = table.canonical(terms);
        table.rows.push(Row {
            symbol: symbol.to_string(),
            terms,
        });
    }
    table
}

/// Row-by-row comparison of two tables over the same state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RowComparison {
    pub symbol: String,
    pub literal: String,
    pub derived: String,
    pub matches: bool,
}

pub fn compare_tables(literal: &ConstraintTable, derived: &ConstraintTable) -> Vec<RowComparison> {
    derived
        .rows
        .iter()
        .map(|d| {
            let l = literal.row(&d.symbol).cloned().unwrap_or(Row {
                symbol: d.symbol.clone(),
                terms: Vec::new(),
            });
            let mut monomials: Vec<&Vec<String>> = d.terms.iter().map(|t| &t.monomial).collect();
            monomials.extend(l.terms.iter().map(|t| &t.monomial));
            let matches = monomials.iter().all(|m| {
                let key: Vec<&str> = m.iter().map(String::as_str).collect();
                let a = l.coefficient_of(&key);
                let b = d.coefficient_of(&key);
                (a - b).norm() <= 1e-12 * a.norm().max(b.norm()).max(1.0)
            });
            RowComparison {
                symbol: d.symbol.clone(),
                literal: l.expression(),
                derived: d.expression(),
                matches,
            }
        })
        .collect()
}

/// Formats `3`, `-0.5i` or `(1+2i)`.
pub fn format_coeff(c: Complex64) -> String {
    match (c.re == 0.0, c.im == 0.0) {
        (_, true) => format!("{}", c.re),
        (true, false) => format!("{}i", c.im),
        (false, false) => {
            if c.im < 0.0 {
                format!("({}{}i)", c.re, c.im)
            } else {
                format!("({}+{}i)", c.re, c.im)
            }
        }
    }
}
