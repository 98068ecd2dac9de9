//! Exact exponent arithmetic: scaling, admissible classes, dispersive decay
//! rates and the epsilon-window exponent selection for the NLS/NLW
//! contraction arguments.
//!
//! Everything here is exact. Exponents live in [`ExtRational`], which adds a
//! point at infinity whose reciprocal is zero.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use num_rational::Ratio;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{invalid, Error, Result};

pub type Rational = Ratio<i128>;

pub fn rat(n: i128, d: i128) -> Rational {
    Rational::new(n, d)
}

fn int(n: i128) -> Rational {
    Rational::from_integer(n)
}

pub fn rational_to_f64(x: &Rational) -> f64 {
    *x.numer() as f64 / *x.denom() as f64
}

/// Parse `"3"`, `"-1/2"`, `"16/3"`.
pub fn parse_rational(s: &str) -> Result<Rational> {
    let s = s.trim();
    let parsed = match s.split_once('/') {
        Some((n, d)) => {
            let n: i128 = n.trim().parse().map_err(|_| bad_rational(s))?;
            let d: i128 = d.trim().parse().map_err(|_| bad_rational(s))?;
            if d == 0 {
                return Err(bad_rational(s));
            }
            Rational::new(n, d)
        }
        None => int(s.parse().map_err(|_| bad_rational(s))?),
    };
    Ok(parsed)
}

fn bad_rational(s: &str) -> Error {
    Error::InvalidParameter(format!("cannot parse rational `{s}`"))
}

/// A rational number or `+inf`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ExtRational {
    Finite(Rational),
    Infinite,
}

impl ExtRational {
    pub fn new(n: i128, d: i128) -> Self {
        ExtRational::Finite(rat(n, d))
    }

    pub fn integer(n: i128) -> Self {
        ExtRational::Finite(int(n))
    }

    /// Reciprocal with `1/inf = 0`. Zero has no finite reciprocal.
    pub fn recip(&self) -> Rational {
        match self {
            ExtRational::Infinite => Rational::zero(),
            ExtRational::Finite(x) => {
                assert!(!x.is_zero(), "reciprocal of zero exponent");
                x.recip()
            }
        }
    }

    /// Inverse of [`recip`](Self::recip): zero maps to infinity.
    pub fn from_recip(x: Rational) -> Self {
        if x.is_zero() {
            ExtRational::Infinite
        } else {
            ExtRational::Finite(x.recip())
        }
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, ExtRational::Infinite)
    }

    pub fn finite(&self) -> Option<Rational> {
        match self {
            ExtRational::Finite(x) => Some(*x),
            ExtRational::Infinite => None,
        }
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            ExtRational::Finite(x) => rational_to_f64(x),
            ExtRational::Infinite => f64::INFINITY,
        }
    }

    /// Hölder conjugate `p' = p/(p-1)`, with `1' = inf` and `inf' = 1`.
    pub fn conjugate(&self) -> Result<Self> {
        match self {
            ExtRational::Infinite => Ok(ExtRational::integer(1)),
            ExtRational::Finite(x) if *x < Rational::one() => {
                invalid(format!("no conjugate exponent for {x} < 1"))
            }
            ExtRational::Finite(x) => Ok(ExtRational::from_recip(Rational::one() - x.recip())),
        }
    }
}

impl From<Rational> for ExtRational {
    fn from(x: Rational) -> Self {
        ExtRational::Finite(x)
    }
}

impl PartialOrd for ExtRational {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for ExtRational {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (ExtRational::Infinite, ExtRational::Infinite) => Ordering::Equal,
            (ExtRational::Infinite, _) => Ordering::Greater,
            (_, ExtRational::Infinite) => Ordering::Less,
            (ExtRational::Finite(a), ExtRational::Finite(b)) => a.cmp(b),
        }
    }
}

impl fmt::Display for ExtRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtRational::Infinite => write!(f, "inf"),
            ExtRational::Finite(x) => write!(f, "{x}"),
        }
    }
}

impl FromStr for ExtRational {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "inf" | "infinity" | "∞" | "+inf" => Ok(ExtRational::Infinite),
            other => parse_rational(other).map(ExtRational::Finite),
        }
    }
}

impl Serialize for ExtRational {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for ExtRational {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Mixed-norm exponents `(q, r, r~)` for `L^q_t L^r_x L^{r~}_y`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ExponentTriple {
    pub q: ExtRational,
    pub r: ExtRational,
    pub r_tilde: ExtRational,
}

impl ExponentTriple {
    pub fn new(q: ExtRational, r: ExtRational, r_tilde: ExtRational) -> Result<Self> {
        for (name, e) in [("q", q), ("r", r), ("r_tilde", r_tilde)] {
            if let ExtRational::Finite(x) = e {
                if x < Rational::one() {
                    return invalid(format!("exponent {name} = {x} is below 1"));
                }
            }
        }
        Ok(ExponentTriple { q, r, r_tilde })
    }

    /// Build from reciprocals `(1/q, 1/r, 1/r~)`.
    pub fn from_recips(q: Rational, r: Rational, r_tilde: Rational) -> Result<Self> {
        Self::new(
            ExtRational::from_recip(q),
            ExtRational::from_recip(r),
            ExtRational::from_recip(r_tilde),
        )
    }

    pub fn recips(&self) -> (Rational, Rational, Rational) {
        (self.q.recip(), self.r.recip(), self.r_tilde.recip())
    }
}

impl fmt::Display for ExponentTriple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.q, self.r, self.r_tilde)
    }
}

impl FromStr for ExponentTriple {
    type Err = Error;

    /// Accepts `"inf,2,2"` or `"(16/3, 4, 16/7)"`.
    fn from_str(s: &str) -> Result<Self> {
        let body = s.trim().trim_start_matches('(').trim_end_matches(')');
        let parts: Vec<&str> = body.split(',').collect();
        if parts.len() != 3 {
            return invalid(format!("expected three exponents in `{s}`"));
        }
        Self::new(parts[0].parse()?, parts[1].parse()?, parts[2].parse()?)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum FlowOrder {
    /// `sigma = 1`, half-wave flow.
    Wave,
    /// `sigma = 2`, Schrödinger flow.
    Schrodinger,
}

impl FlowOrder {
    pub fn from_sigma(sigma: i64) -> Result<Self> {
        match sigma {
            1 => Ok(FlowOrder::Wave),
            2 => Ok(FlowOrder::Schrodinger),
            other => invalid(format!("flow order must be 1 or 2, got {other}")),
        }
    }

    pub fn sigma(&self) -> i64 {
        match self {
            FlowOrder::Wave => 1,
            FlowOrder::Schrodinger => 2,
        }
    }

    pub fn sigma_f64(&self) -> f64 {
        self.sigma() as f64
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EquationParams {
    pub n: u32,
    pub k: u32,
    pub flow: FlowOrder,
    pub s: Rational,
    pub p: Rational,
}

impl EquationParams {
    pub fn new(n: u32, k: u32, flow: FlowOrder, s: Rational, p: Rational) -> Result<Self> {
        if k < 1 || k > n {
            return invalid(format!("need 1 <= k <= N, got N = {n}, k = {k}"));
        }
        if p <= Rational::one() {
            return invalid(format!("need p > 1, got {p}"));
        }
        Ok(EquationParams { n, k, flow, s, p })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SelectionResult {
    pub epsilon: Rational,
    pub window: (Rational, Rational),
    pub triple: ExponentTriple,
    pub beta: Rational,
}

/// How to pick epsilon inside the open window `(lo, hi)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum EpsilonPick {
    #[default]
    Midpoint,
    /// A fixed value; rejected unless strictly inside the window.
    Fixed(Rational),
    /// `lo + theta (hi - lo)` for `0 < theta < 1`.
    Fraction(Rational),
}

impl EpsilonPick {
    fn choose(&self, lo: Rational, hi: Rational) -> Result<Rational> {
        let eps = match self {
            EpsilonPick::Midpoint => (lo + hi) / int(2),
            EpsilonPick::Fixed(e) => *e,
            EpsilonPick::Fraction(theta) => lo + *theta * (hi - lo),
        };
        if eps <= lo || eps >= hi {
            return invalid(format!("epsilon {eps} is not inside the window ({lo}, {hi})"));
        }
        Ok(eps)
    }
}

fn check_p(p: Rational) -> Result<()> {
    if p <= Rational::one() {
        return invalid(format!("need p > 1, got {p}"));
    }
    Ok(())
}

/// `s_c = N/2 - 2/(p-1)`.
pub fn critical_index(n: u32, p: Rational) -> Result<Rational> {
    check_p(p)?;
    Ok(rat(n as i128, 2) - int(2) / (p - int(1)))
}

/// Power of `delta` in `||f_delta||_{H^s} = delta^e ||f||_{H^s}` for
/// `f_delta(x) = delta^{2/(p-1)} f(delta x)`.
pub fn scaling_exponent(n: u32, p: Rational, s: Rational) -> Result<Rational> {
    check_p(p)?;
    Ok(int(2) / (p - int(1)) + s - rat(n as i128, 2))
}

fn bounds_ok(t: &ExponentTriple) -> bool {
    let two = ExtRational::integer(2);
    t.q > two && t.r_tilde >= two && t.r_tilde <= t.r && !t.r.is_infinite()
}

/// Schrödinger-type class: `2/q + (N-k)/r + k/r~ = N/2`.
pub fn in_class_s(n: u32, k: u32, t: &ExponentTriple) -> bool {
    if k < 1 || k >= n || !bounds_ok(t) {
        return false;
    }
    let (iq, ir, irt) = t.recips();
    let (n, k) = (n as i128, k as i128);
    int(2) * iq + int(n - k) * ir + int(k) * irt == rat(n, 2)
}

/// Wave-type class: `1/q + (N-k)/r + k/r~ = (N-1)/2` together with
/// `2/q + (N-k-1)/r + k/r~ <= (N-1)/2`.
pub fn in_class_w(n: u32, k: u32, t: &ExponentTriple) -> bool {
    if k < 1 || k >= n || !bounds_ok(t) {
        return false;
    }
    let (iq, ir, irt) = t.recips();
    let (n, k) = (n as i128, k as i128);
    let half = rat(n - 1, 2);
    iq + int(n - k) * ir + int(k) * irt == half
        && int(2) * iq + int(n - k - 1) * ir + int(k) * irt <= half
}

/// `beta_sigma(r, r~) = (N-k-2+sigma)(1/2-1/r) + k(1/2-1/r~)`.
pub fn dispersive_beta(
    n: u32,
    k: u32,
    flow: FlowOrder,
    r: ExtRational,
    r_tilde: ExtRational,
) -> Result<Rational> {
    if k < 1 || k > n {
        return invalid(format!("need 1 <= k <= N, got N = {n}, k = {k}"));
    }
    let two = ExtRational::integer(2);
    if r < two || r_tilde < two {
        return invalid(format!("exponents must be at least 2, got r = {r}, r~ = {r_tilde}"));
    }
    if r_tilde > r {
        return invalid(format!("need r~ <= r, got r = {r}, r~ = {r_tilde}"));
    }
    let half = rat(1, 2);
    let (n, k) = (n as i128, k as i128);
    Ok(int(n - k - 2 + flow.sigma() as i128) * (half - r.recip()) + int(k) * (half - r_tilde.recip()))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScalingReport {
    /// `2/q <= (N-2-k+sigma)(1/2-1/r) + k(1/2-1/r~)`.
    pub dispersion_ok: bool,
    /// The regularity forced by `sigma/q = (N-k)(1/2-1/r) + k(1/2-1/r~) - s`.
    pub implied_s: Rational,
    /// Whether the dispersion inequality is strict.
    pub strict: bool,
}

pub fn check_scaling_conditions(params: &EquationParams, t: &ExponentTriple) -> ScalingReport {
    let (iq, ir, irt) = t.recips();
    let half = rat(1, 2);
    let n = params.n as i128;
    let k = params.k as i128;
    let sigma = params.flow.sigma() as i128;
    let rhs = int(n - 2 - k + sigma) * (half - ir) + int(k) * (half - irt);
    let lhs = int(2) * iq;
    let implied_s = int(n - k) * (half - ir) + int(k) * (half - irt) - int(sigma) * iq;
    ScalingReport {
        dispersion_ok: lhs <= rhs,
        implied_s,
        strict: lhs < rhs,
    }
}

/// Exponent selection for the NLS contraction with `k = 2`.
pub fn select_schrodinger_exponents(
    n: u32,
    s: Rational,
    p: Rational,
    pick: EpsilonPick,
) -> Result<SelectionResult> {
    if n < 3 {
        return invalid(format!("need N >= 3, got {n}"));
    }
    if !s.is_positive() || s > int(1) {
        return invalid(format!("need 0 < s <= 1, got {s}"));
    }
    check_p(p)?;
    let ni = n as i128;
    let lo = (int(1) - s) * (p - int(1)) / int(2);
    let gap = rat(ni - 2, 4) * (int(1) + rat(4, ni - 2) - p);
    let hi = gap.min((p - int(1)) / int(2));
    if lo >= hi {
        return Err(Error::EmptyWindow { lower: lo.to_string(), upper: hi.to_string() });
    }
    let eps = pick.choose(lo, hi)?;
    let p1 = p + int(1);
    let triple = ExponentTriple::from_recips(
        rat(ni - 2, 4) - rat(ni - 2, 2) / p1 + eps / p1,
        p1.recip(),
        rat(1, 2) - eps / p1,
    )?;
    let beta = int(1) - p1 * triple.q.recip();
    let result = SelectionResult { epsilon: eps, window: (lo, hi), triple, beta };
    if !in_class_s(n, 2, &triple) {
        return post(format!("selected triple {triple} is not in the S class"));
    }
    if !beta.is_positive() {
        return post(format!("beta = {beta} is not positive"));
    }
    if beta != gap - eps {
        return post(format!("beta = {beta} differs from the window gap {}", gap - eps));
    }
    Ok(result)
}

/// Exponent selection for the NLW contraction with `k = 1`.
pub fn select_wave_exponents(
    n: u32,
    s: Rational,
    p: Rational,
    pick: EpsilonPick,
) -> Result<SelectionResult> {
    if n < 2 {
        return invalid(format!("need N >= 2, got {n}"));
    }
    if !s.is_positive() || s > rat(1, 2) {
        return invalid(format!("need 0 < s <= 1/2, got {s}"));
    }
    check_p(p)?;
    let ni = n as i128;
    let p_lo = int(1) + rat(2, ni - 1);
    if p <= p_lo {
        return Err(Error::OutsideRange(format!("need p > {p_lo}, got {p}")));
    }
    let room = int(ni - 1) - int(2) * s;
    if room.is_positive() {
        let p_hi = int(1) + int(4) / room;
        if p >= p_hi {
            return Err(Error::OutsideRange(format!("need p < {p_hi}, got {p}")));
        }
    }
    let pm = p - int(1);
    let lo = ((int(1) - int(2) * s) * pm / int(2)).max(int(1) - int(ni - 2) * pm / int(2));
    let hi = (pm / int(2)).min(int(2) - int(ni - 2) * pm / int(2));
    if lo >= hi {
        return Err(Error::EmptyWindow { lower: lo.to_string(), upper: hi.to_string() });
    }
    let eps = pick.choose(lo, hi)?;
    let p1 = p + int(1);
    let triple = ExponentTriple::from_recips(
        rat(ni - 2, 2) - int(ni - 1) / p1 + eps / p1,
        p1.recip(),
        rat(1, 2) - eps / p1,
    )?;
    let beta = int(1) - p1 * triple.q.recip();
    if !in_class_w(n, 1, &triple) {
        return post(format!("selected triple {triple} is not in the W class"));
    }
    if !beta.is_positive() {
        return post(format!("beta = {beta} is not positive"));
    }
    // Same quantity written without dividing by N - 2.
    if beta != int(2) - int(ni - 2) * pm / int(2) - eps {
        return post(format!("beta = {beta} disagrees with 2 - (N-2)(p-1)/2 - eps"));
    }
    Ok(SelectionResult { epsilon: eps, window: (lo, hi), triple, beta })
}

fn post<T>(msg: String) -> Result<T> {
    Err(Error::Postcondition(msg))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ClassFlavor {
    S,
    W,
}

/// Distinct reduced fractions `a/b` in `(0, 1/2]` with `b <= bound`, ascending.
fn farey_half(bound: i128) -> Vec<Rational> {
    let mut out: Vec<Rational> = (2..=bound)
        .flat_map(|b| (1..=b / 2).map(move |a| rat(a, b)))
        .collect();
    out.sort();
    out.dedup();
    out
}

/// Every triple of the given class whose finite exponents have reciprocal
/// denominators at most `denom_bound`. Sorted by `(q, r, r~)` with
/// `inf` last.
pub fn admissible_enumerate(
    n: u32,
    k: u32,
    flavor: ClassFlavor,
    denom_bound: u32,
) -> Result<Vec<ExponentTriple>> {
    if denom_bound < 2 {
        return invalid(format!("denominator bound must be at least 2, got {denom_bound}"));
    }
    let recips = farey_half(denom_bound as i128);
    let mut q_recips = vec![Rational::zero()];
    q_recips.extend(recips.iter().copied().filter(|x| *x < rat(1, 2)));
    let mut out = Vec::new();
    for &iq in &q_recips {
        for &ir in &recips {
            for &irt in recips.iter().filter(|&&x| x >= ir) {
                let t = ExponentTriple::from_recips(iq, ir, irt)?;
                let keep = match flavor {
                    ClassFlavor::S => in_class_s(n, k, &t),
                    ClassFlavor::W => in_class_w(n, k, &t),
                };
                if keep {
                    out.push(t);
                }
            }
        }
    }
    out.sort();
    Ok(out)
}
