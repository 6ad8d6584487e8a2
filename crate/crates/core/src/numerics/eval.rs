//! Double-precision evaluation of rational expressions.

use crate::error::{Error, Result};
use crate::symkernel::{to_f64, Polynomial, Rational, RationalExpr, Sym};

/// Unevaluated sum `hi + lo` with `|lo| <= ulp(hi)/2`.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
struct Dd(f64, f64);

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

#[inline]
fn fast_two_sum(a: f64, b: f64) -> Dd {
    let s = a + b;
    Dd(s, b - (s - a))
}

impl Dd {
    #[inline]
    fn add(self, o: Dd) -> Dd {
        let (s, e) = two_sum(self.0, o.0);
        fast_two_sum(s, e + self.1 + o.1)
    }

    #[inline]
    fn mul(self, o: Dd) -> Dd {
        let p = self.0 * o.0;
        let e = self.0.mul_add(o.0, -p);
        fast_two_sum(p, e + self.0 * o.1 + self.1 * o.0)
    }

    #[inline]
    fn div(self, o: Dd) -> f64 {
        let q = self.0 / o.0;
        // one Newton correction in double-double
        let r = self.add(o.mul(Dd(-q, 0.0)));
        q + (r.0 + r.1) / o.0
    }

    fn from_rational(c: &Rational) -> Dd {
        let hi = to_f64(c);
        let lo = Rational::from_float(hi).map_or(0.0, |h| to_f64(&(c - h)));
        fast_two_sum(hi, lo)
    }
}

#[derive(Clone, Debug)]
struct CompiledPoly {
    /// Coefficient and `(input slot, exponent)` factors per term.
    terms: Vec<(Dd, Vec<(u16, u16)>)>,
}

impl CompiledPoly {
    fn eval(&self, pows: &[Dd], offsets: &[usize]) -> Dd {
        let mut acc = Dd::default();
        for (c, factors) in &self.terms {
            let mut v = *c;
            for &(slot, e) in factors {
                v = v.mul(pows[offsets[slot as usize] + e as usize]);
            }
            acc = acc.add(v);
        }
        acc
    }
}

/// Power table reused across calls to [`Evaluator::eval_with`].
#[derive(Clone, Debug)]
pub struct Scratch(Vec<Dd>);

/// A batch of expressions compiled against a fixed input order. Powers of
/// each input are built once per call and shared by every term; sums and
/// products run in double-double so cancellation inside a polynomial costs
/// no accuracy beyond the rounding of the inputs.
#[derive(Clone, Debug)]
pub struct Evaluator {
    inputs: Vec<Sym>,
    max_exp: Vec<usize>,
    offsets: Vec<usize>,
    nums: Vec<CompiledPoly>,
    /// `None` for polynomial outputs.
    dens: Vec<Option<CompiledPoly>>,
}

impl Evaluator {
    /// Every symbol in `exprs` must appear in `inputs`.
    pub fn new(exprs: &[RationalExpr], inputs: &[Sym]) -> Result<Evaluator> {
        let mut max_exp = vec![0usize; inputs.len()];
        let mut compile = |p: &Polynomial| -> Result<CompiledPoly> {
            let mut terms = Vec::with_capacity(p.len());
            for (m, c) in p.terms() {
                let mut factors = Vec::new();
                for (s, e) in m.support() {
                    let slot = inputs
                        .iter()
                        .position(|&x| x == s)
                        .ok_or_else(|| Error::Unbound(p.table().name(s).to_string()))?;
                    max_exp[slot] = max_exp[slot].max(e as usize);
                    factors.push((slot as u16, e as u16));
                }
                terms.push((Dd::from_rational(c), factors));
            }
            Ok(CompiledPoly { terms })
        };
        let mut nums = Vec::new();
        let mut dens = Vec::new();
        for e in exprs {
            nums.push(compile(e.num())?);
            dens.push(if e.is_polynomial() { None } else { Some(compile(e.den())?) });
        }
        let mut offsets = Vec::with_capacity(inputs.len());
        let mut total = 0;
        for m in &max_exp {
            offsets.push(total);
            total += m + 1;
        }
        Ok(Evaluator { inputs: inputs.to_vec(), max_exp, offsets, nums, dens })
    }

    pub fn inputs(&self) -> &[Sym] {
        &self.inputs
    }

    pub fn outputs(&self) -> usize {
        self.nums.len()
    }

    pub fn scratch(&self) -> Scratch {
        Scratch(vec![Dd::default(); self.offsets.last().map_or(0, |o| o + self.max_exp.last().unwrap_or(&0) + 1)])
    }

    /// Writes every output and returns the smallest denominator magnitude
    /// (infinity when all outputs are polynomial).
    pub fn eval_with(&self, x: &[f64], out: &mut [f64], scratch: &mut Scratch) -> f64 {
        debug_assert_eq!(x.len(), self.inputs.len());
        let pows = &mut scratch.0;
        for (i, &xi) in x.iter().enumerate() {
            let base = self.offsets[i];
            pows[base] = Dd(1.0, 0.0);
            for e in 1..=self.max_exp[i] {
                pows[base + e] = pows[base + e - 1].mul(Dd(xi, 0.0));
            }
        }
        let mut min_den = f64::INFINITY;
        for (k, num) in self.nums.iter().enumerate() {
            let n = num.eval(pows, &self.offsets);
            out[k] = match &self.dens[k] {
                None => n.0 + n.1,
                Some(d) => {
                    let dv = d.eval(pows, &self.offsets);
                    min_den = min_den.min((dv.0 + dv.1).abs());
                    n.div(dv)
                }
            };
        }
        min_den
    }

    pub fn eval(&self, x: &[f64]) -> (Vec<f64>, f64) {
        let mut out = vec![0.0; self.outputs()];
        let mut pows = self.scratch();
        let m = self.eval_with(x, &mut out, &mut pows);
        (out, m)
    }
}
