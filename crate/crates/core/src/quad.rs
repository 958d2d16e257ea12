//! Adaptive Gauss-Kronrod (7, 15) quadrature.

const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];
// Gauss weights for the odd-indexed Kronrod nodes (1, 3, 5, 7).
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

const MAX_SEGMENTS: usize = 4000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
}

fn gk15<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = half * XGK[j];
        let pair = f(center - dx) + f(center + dx);
        kronrod += WGK[j] * pair;
        if j % 2 == 1 {
            gauss += WG[j / 2] * pair;
        }
    }
    (kronrod * half, ((kronrod - gauss) * half).abs())
}

/// Integrates `f` over the finite interval `[a, b]` to relative tolerance
/// `rel_tol` (with a tiny absolute floor for integrals that vanish).
pub fn integrate<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, rel_tol: f64) -> Estimate {
    if a == b {
        return Estimate {
            value: 0.0,
            error: 0.0,
        };
    }
    let (lo, hi, sign) = if a < b { (a, b, 1.0) } else { (b, a, -1.0) };
    let (v, e) = gk15(&mut f, lo, hi);
    let mut segments = vec![(lo, hi, v, e)];
    let mut total = v;
    let mut err = e;
    while err > (rel_tol * total.abs()).max(1e-300) && segments.len() < MAX_SEGMENTS {
        // bisect the segment with the largest error
        let (idx, _) = segments
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .3.total_cmp(&y.1 .3))
            .expect("nonempty");
        let (s, t, sv, se) = segments.swap_remove(idx);
        let mid = 0.5 * (s + t);
        if mid <= s || mid >= t {
            segments.push((s, t, sv, 0.0));
            err -= se;
            continue;
        }
        let (v1, e1) = gk15(&mut f, s, mid);
        let (v2, e2) = gk15(&mut f, mid, t);
        total += v1 + v2 - sv;
        err += e1 + e2 - se;
        segments.push((s, mid, v1, e1));
        segments.push((mid, t, v2, e2));
    }
    // resum to shed accumulated cancellation from the running updates
    let value: f64 = segments.iter().map(|s| s.2).sum();
    let error: f64 = segments.iter().map(|s| s.3).sum();
    Estimate {
        value: sign * value,
        error,
    }
}

/// Integrates `f` over `[a, ∞)` via the map `x = a + t / (1 - t)`.
pub fn integrate_to_infinity<F: FnMut(f64) -> f64>(mut f: F, a: f64, rel_tol: f64) -> Estimate {
    integrate(
        |t| {
            if t >= 1.0 {
                return 0.0;
            }
            let one_minus = 1.0 - t;
            let x = a + t / one_minus;
            let v = f(x) / (one_minus * one_minus);
            if v.is_finite() {
                v
            } else {
                0.0
            }
        },
        0.0,
        1.0,
        rel_tol,
    )
}

/// Sums finite-interval pieces split at `breaks` (sorted, inside `[a, b]`).
pub fn integrate_pieces<F: FnMut(f64) -> f64>(
    mut f: F,
    a: f64,
    b: f64,
    breaks: &[f64],
    rel_tol: f64,
) -> Estimate {
    let mut knots = vec![a];
    knots.extend(breaks.iter().copied().filter(|&x| x > a && x < b));
    knots.push(b);
    let mut out = Estimate {
        value: 0.0,
        error: 0.0,
    };
    for w in knots.windows(2) {
        let e = integrate(&mut f, w[0], w[1], rel_tol);
        out.value += e.value;
        out.error += e.error;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_is_exact() {
        let e = integrate(|x| x * x, 0.0, 3.0, 1e-12);
        assert!((e.value - 9.0).abs() < 1e-12);
    }

    #[test]
    fn semi_infinite_power_tail() {
        // ∫_1^∞ 3 x^-2 dx = 3
        let e = integrate_to_infinity(|x| 3.0 * x.powi(-2), 1.0, 1e-10);
        assert!((e.value - 3.0).abs() < 1e-9, "{e:?}");
        // ∫_0^∞ x e^-x dx = 1
        let e = integrate_to_infinity(|x| x * (-x).exp(), 0.0, 1e-10);
        assert!((e.value - 1.0).abs() < 1e-9, "{e:?}");
    }

    #[test]
    fn reversed_bounds_flip_sign() {
        let e = integrate(|x| x, 2.0, 0.0, 1e-12);
        assert!((e.value + 2.0).abs() < 1e-12);
    }
}
