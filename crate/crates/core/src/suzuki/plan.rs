use crate::error::{Error, Result};

/// Upper limit on the number of steps a single plan may hold.
pub const MAX_PLAN_STEPS: u64 = 50_000_000;

/// Unevaluated sum `hi + lo` carrying about 106 bits of mantissa, used while
/// the recursion multiplies coefficients together.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct DoubleDouble {
    hi: f64,
    lo: f64,
}

impl DoubleDouble {
    pub(crate) const fn from_f64(v: f64) -> Self {
        Self { hi: v, lo: 0.0 }
    }

    pub(crate) fn to_f64(self) -> f64 {
        self.hi + self.lo
    }

    fn quick_two_sum(a: f64, b: f64) -> Self {
        let s = a + b;
        Self {
            hi: s,
            lo: b - (s - a),
        }
    }

    fn two_sum(a: f64, b: f64) -> (f64, f64) {
        let s = a + b;
        let bb = s - a;
        (s, (a - (s - bb)) + (b - bb))
    }

    pub(crate) fn add(self, other: Self) -> Self {
        let (s, e) = Self::two_sum(self.hi, other.hi);
        Self::quick_two_sum(s, e + self.lo + other.lo)
    }

    pub(crate) fn neg(self) -> Self {
        Self {
            hi: -self.hi,
            lo: -self.lo,
        }
    }

    pub(crate) fn sub(self, other: Self) -> Self {
        self.add(other.neg())
    }

    pub(crate) fn mul(self, other: Self) -> Self {
        let p = self.hi * other.hi;
        let e = self.hi.mul_add(other.hi, -p);
        Self::quick_two_sum(p, e + self.hi * other.lo + self.lo * other.hi)
    }

    fn powi(self, exp: u32) -> Self {
        (0..exp).fold(Self::from_f64(1.0), |acc, _| acc.mul(self))
    }

    pub(crate) fn recip(self) -> Self {
        let q = Self::from_f64(1.0 / self.hi);
        // one Newton step: q + q (1 - x q)
        let residual = Self::from_f64(1.0).sub(self.mul(q));
        q.add(q.mul(residual))
    }

    /// `base^(1/q)` for a positive `base`.
    pub(crate) fn root(base: f64, q: u32) -> Self {
        let y0 = base.powf(1.0 / f64::from(q));
        let y = Self::from_f64(y0);
        let excess = y.powi(q).sub(Self::from_f64(base)).to_f64();
        let slope = f64::from(q) * y0.powi(q as i32 - 1);
        y.sub(Self::from_f64(excess / slope))
    }
}

/// `p_k = 1 / (4 - 4^(1/(2k-1)))` in extended precision.
pub(crate) fn p_coefficient_dd(k: u32) -> DoubleDouble {
    let root = DoubleDouble::root(4.0, 2 * k - 1);
    DoubleDouble::from_f64(4.0).sub(root).recip()
}

/// One exponential `exp(-i H_term · fraction · t_slice)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Step {
    /// 1-based term index.
    pub term: usize,
    pub fraction: f64,
}

/// The ordered exponentials making up one slice `S_2k(-i t / r)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProductFormulaPlan {
    k: u32,
    m: usize,
    steps: Vec<Step>,
}

impl ProductFormulaPlan {
    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn terms(&self) -> usize {
        self.m
    }

    pub fn steps(&self) -> &[Step] {
        &self.steps
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }
}

struct Builder {
    steps: Vec<(usize, DoubleDouble)>,
}

impl Builder {
    fn push(&mut self, term: usize, fraction: DoubleDouble) {
        match self.steps.last_mut() {
            Some((last, acc)) if *last == term => *acc = acc.add(fraction),
            _ => self.steps.push((term, fraction)),
        }
    }

    fn second_order(&mut self, m: usize, coeff: DoubleDouble) {
        let half = coeff.mul(DoubleDouble::from_f64(0.5));
        for term in 1..=m {
            self.push(term, half);
        }
        for term in (1..=m).rev() {
            self.push(term, half);
        }
    }

    fn order(&mut self, k: u32, m: usize, coeff: DoubleDouble, p: &[DoubleDouble]) {
        if k == 1 {
            self.second_order(m, coeff);
            return;
        }
        let pk = p[k as usize];
        let outer = coeff.mul(pk);
        let inner = coeff.mul(DoubleDouble::from_f64(1.0).sub(DoubleDouble::from_f64(4.0).mul(pk)));
        self.order(k - 1, m, outer, p);
        self.order(k - 1, m, outer, p);
        self.order(k - 1, m, inner, p);
        self.order(k - 1, m, outer, p);
        self.order(k - 1, m, outer, p);
    }
}

/// Builds `S_2k` for `m` terms with adjacent equal-term exponentials merged.
pub fn build_plan(k: u32, m: usize) -> Result<ProductFormulaPlan> {
    if k == 0 {
        return Err(Error::InvalidParameter(
            "order index k must be at least 1".into(),
        ));
    }
    if m == 0 {
        return Err(Error::InvalidParameter(
            "at least one term is required".into(),
        ));
    }
    let expected = super::exponential_count(k, m);
    if expected > MAX_PLAN_STEPS {
        return Err(Error::InvalidParameter(format!(
            "plan with {expected} exponentials is too large"
        )));
    }
    let p: Vec<DoubleDouble> = (0..=k)
        .map(|j| {
            if j >= 2 {
                p_coefficient_dd(j)
            } else {
                DoubleDouble::from_f64(0.0)
            }
        })
        .collect();
    let mut builder = Builder {
        steps: Vec::with_capacity(expected as usize),
    };
    builder.order(k, m, DoubleDouble::from_f64(1.0), &p);

    let mut sums = vec![DoubleDouble::from_f64(0.0); m];
    for &(term, fraction) in &builder.steps {
        sums[term - 1] = sums[term - 1].add(fraction);
    }
    for (idx, sum) in sums.iter().enumerate() {
        let deviation = (sum.to_f64() - 1.0).abs();
        if deviation > 1e-12 {
            return Err(Error::PlanInvariant(format!(
                "fractions of term {} sum to 1 {deviation:+e}",
                idx + 1
            )));
        }
    }
    if builder.steps.len() as u64 != expected {
        return Err(Error::PlanInvariant(format!(
            "built {} exponentials, expected {expected}",
            builder.steps.len()
        )));
    }
    let steps = builder
        .steps
        .into_iter()
        .map(|(term, fraction)| Step {
            term,
            fraction: fraction.to_f64(),
        })
        .collect();
    Ok(ProductFormulaPlan { k, m, steps })
}
