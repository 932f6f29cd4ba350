//! Scalar helpers over `libm` so the crate stays `no_std`.

pub const LN_2: f64 = core::f64::consts::LN_2;

#[inline]
pub fn exp(x: f64) -> f64 {
    libm::exp(x)
}

#[inline]
pub fn ln(x: f64) -> f64 {
    libm::log(x)
}

#[inline]
pub fn log2(x: f64) -> f64 {
    libm::log2(x)
}

#[inline]
pub fn sqrt(x: f64) -> f64 {
    libm::sqrt(x)
}

#[inline]
pub fn ln_1p(x: f64) -> f64 {
    libm::log1p(x)
}

/// `ln(1 + e^x)` without overflow.
#[inline]
pub fn softplus(x: f64) -> f64 {
    if x > 0.0 {
        x + ln_1p(exp(-x))
    } else {
        ln_1p(exp(x))
    }
}

/// `1 / (1 + e^{-x})`.
#[inline]
pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + exp(-x))
    } else {
        let e = exp(x);
        e / (1.0 + e)
    }
}

/// One residual layer term: `-ln(½(1 + e^x)) = ln 2 - softplus(x)`.
#[inline]
pub fn residual_term(x: f64) -> f64 {
    LN_2 - softplus(x)
}

/// `ln Σ e^{x_i}` over a non-empty iterator; `-∞` when empty.
pub fn log_sum_exp<I: IntoIterator<Item = f64> + Clone>(xs: I) -> f64 {
    let max = xs.clone().into_iter().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    let s: f64 = xs.into_iter().map(|x| exp(x - max)).sum();
    max + ln(s)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn softplus_branches_agree() {
        for &x in &[-800.0, -30.0, -1.0, 0.0, 1.0, 30.0, 800.0] {
            let sp = softplus(x);
            assert!(sp.is_finite());
            if x.abs() < 30.0 {
                assert!((sp - (1.0 + x.exp()).ln()).abs() < 1e-14);
            }
        }
        assert_eq!(softplus(800.0), 800.0);
    }

    #[test]
    fn residual_term_at_zero_and_ln3() {
        assert_eq!(residual_term(0.0), 0.0);
        assert!((residual_term(3f64.ln()) + LN_2).abs() < 1e-15);
    }

    #[test]
    fn log_sum_exp_basic() {
        let v = [1.0f64, 2.0, 3.0];
        let direct = (1f64.exp() + 2f64.exp() + 3f64.exp()).ln();
        assert!((log_sum_exp(v.iter().copied()) - direct).abs() < 1e-14);
        assert_eq!(log_sum_exp(core::iter::empty::<f64>()), f64::NEG_INFINITY);
    }
}
