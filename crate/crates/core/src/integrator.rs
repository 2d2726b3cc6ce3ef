//! Adaptive Dormand–Prince 8(5,3) integrator for complex-valued ODE systems.

#![allow(clippy::excessive_precision)]

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Options {
    pub atol: f64,
    pub rtol: f64,
    pub max_steps: usize,
    /// Initial step; estimated from the right-hand side when `None`.
    pub initial_step: Option<f64>,
    pub max_step: Option<f64>,
}

impl Default for Options {
    fn default() -> Self {
        Options { atol: 1e-10, rtol: 1e-10, max_steps: 50_000_000, initial_step: None, max_step: None }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Stats {
    pub accepted: usize,
    pub rejected: usize,
    pub evaluations: usize,
}

const SAFE: f64 = 0.9;
const FAC_MIN: f64 = 0.333;
const FAC_MAX: f64 = 6.0;

const C2: f64 = 0.526001519587677318785587544488e-01;
const C3: f64 = 0.789002279381515978178381316732e-01;
const C4: f64 = 0.118350341907227396726757197510e+00;
const C5: f64 = 0.281649658092772603273242802490e+00;
const C6: f64 = 0.333333333333333333333333333333e+00;
const C7: f64 = 0.25e+00;
const C8: f64 = 0.307692307692307692307692307692e+00;
const C9: f64 = 0.651282051282051282051282051282e+00;
const C10: f64 = 0.6e+00;
const C11: f64 = 0.857142857142857142857142857142e+00;

const B1: f64 = 5.42937341165687622380535766363e-2;
const B6: f64 = 4.45031289275240888144113950566e0;
const B7: f64 = 1.89151789931450038304281599044e0;
const B8: f64 = -5.8012039600105847814672114227e0;
const B9: f64 = 3.1116436695781989440891606237e-1;
const B10: f64 = -1.52160949662516078556178806805e-1;
const B11: f64 = 2.01365400804030348374776537501e-1;
const B12: f64 = 4.47106157277725905176885569043e-2;

const BHH1: f64 = 0.244094488188976377952755905512e+00;
const BHH2: f64 = 0.733846688281611857341361741547e+00;
const BHH3: f64 = 0.220588235294117647058823529412e-01;

const ER1: f64 = 0.1312004499419488073250102996e-01;
const ER6: f64 = -0.1225156446376204440720569753e+01;
const ER7: f64 = -0.4957589496572501915214079952e+00;
const ER8: f64 = 0.1664377182454986536961530415e+01;
const ER9: f64 = -0.3503288487499736816886487290e+00;
const ER10: f64 = 0.3341791187130174790297318841e+00;
const ER11: f64 = 0.8192320648511571246570742613e-01;
const ER12: f64 = -0.2235530786388629525884427845e-01;

const A21: f64 = 5.26001519587677318785587544488e-2;
const A31: f64 = 1.97250569845378994544595329183e-2;
const A32: f64 = 5.91751709536136983633785987549e-2;
const A41: f64 = 2.95875854768068491816892993775e-2;
const A43: f64 = 8.87627564304205475450678981324e-2;
const A51: f64 = 2.41365134159266685502369798665e-1;
const A53: f64 = -8.84549479328286085344864962717e-1;
const A54: f64 = 9.24834003261792003115737966543e-1;
const A61: f64 = 3.7037037037037037037037037037e-2;
const A64: f64 = 1.70828608729473871279604482173e-1;
const A65: f64 = 1.25467687566822425016691814123e-1;
const A71: f64 = 3.7109375e-2;
const A74: f64 = 1.70252211019544039314978060272e-1;
const A75: f64 = 6.02165389804559606850219397283e-2;
const A76: f64 = -1.7578125e-2;
const A81: f64 = 3.70920001185047927108779319836e-2;
const A84: f64 = 1.70383925712239993810214054705e-1;
const A85: f64 = 1.07262030446373284651809199168e-1;
const A86: f64 = -1.53194377486244017527936158236e-2;
const A87: f64 = 8.27378916381402288758473766002e-3;
const A91: f64 = 6.24110958716075717114429577812e-1;
const A94: f64 = -3.36089262944694129406857109825e0;
const A95: f64 = -8.68219346841726006818189891453e-1;
const A96: f64 = 2.75920996994467083049415600797e1;
const A97: f64 = 2.01540675504778934086186788979e1;
const A98: f64 = -4.34898841810699588477366255144e1;
const A101: f64 = 4.77662536438264365890433908527e-1;
const A104: f64 = -2.48811461997166764192642586468e0;
const A105: f64 = -5.90290826836842996371446475743e-1;
const A106: f64 = 2.12300514481811942347288949897e1;
const A107: f64 = 1.52792336328824235832596922938e1;
const A108: f64 = -3.32882109689848629194453265587e1;
const A109: f64 = -2.03312017085086261358222928593e-2;
const A111: f64 = -9.3714243008598732571704021658e-1;
const A114: f64 = 5.18637242884406370830023853209e0;
const A115: f64 = 1.09143734899672957818500254654e0;
const A116: f64 = -8.14978701074692612513997267357e0;
const A117: f64 = -1.85200656599969598641566180701e1;
const A118: f64 = 2.27394870993505042818970056734e1;
const A119: f64 = 2.49360555267965238987089396762e0;
const A1110: f64 = -3.0467644718982195003823669022e0;
const A121: f64 = 2.27331014751653820792359768449e0;
const A124: f64 = -1.05344954667372501984066689879e1;
const A125: f64 = -2.00087205822486249909675718444e0;
const A126: f64 = -1.79589318631187989172765950534e1;
const A127: f64 = 2.79488845294199600508499808837e1;
const A128: f64 = -2.85899827713502369474065508674e0;
const A129: f64 = -8.87285693353062954433549289258e0;
const A1210: f64 = 1.23605671757943030647266201528e1;
const A1211: f64 = 6.43392746015763530355970484046e-1;

/// Work arrays for one step.
struct Stages {
    k: [Vec<C64>; 12],
    tmp: Vec<C64>,
    y_new: Vec<C64>,
}

impl Stages {
    fn new(n: usize) -> Self {
        let z = vec![C64::new(0.0, 0.0); n];
        Stages { k: std::array::from_fn(|_| z.clone()), tmp: z.clone(), y_new: z }
    }
}

/// tmp = y + h Σ_i w_i k_i
fn combine(tmp: &mut [C64], y: &[C64], h: f64, k: &[Vec<C64>; 12], w: &[(usize, f64)]) {
    for (i, t) in tmp.iter_mut().enumerate() {
        let mut acc = C64::new(0.0, 0.0);
        for &(s, c) in w {
            acc += k[s][i] * c;
        }
        *t = y[i] + acc * h;
    }
}

fn max_norm(y: &[C64]) -> f64 {
    y.iter().fold(0.0, |m, z| m.max(z.norm()))
}

/// Takes one trial step of size `h` from (t, y) with `k[0]` = f(t, y).
/// Returns the scaled error norm; the candidate solution is left in
/// `st.y_new`.
fn trial_step<F>(f: &mut F, t: f64, y: &[C64], h: f64, st: &mut Stages, opts: &Options) -> f64
where
    F: FnMut(f64, &[C64], &mut [C64]),
{
    let stages: [(f64, &[(usize, f64)]); 11] = [
        (C2, &[(0, A21)]),
        (C3, &[(0, A31), (1, A32)]),
        (C4, &[(0, A41), (2, A43)]),
        (C5, &[(0, A51), (2, A53), (3, A54)]),
        (C6, &[(0, A61), (3, A64), (4, A65)]),
        (C7, &[(0, A71), (3, A74), (4, A75), (5, A76)]),
        (C8, &[(0, A81), (3, A84), (4, A85), (5, A86), (6, A87)]),
        (C9, &[(0, A91), (3, A94), (4, A95), (5, A96), (6, A97), (7, A98)]),
        (C10, &[(0, A101), (3, A104), (4, A105), (5, A106), (6, A107), (7, A108), (8, A109)]),
        (
            C11,
            &[(0, A111), (3, A114), (4, A115), (5, A116), (6, A117), (7, A118), (8, A119), (9, A1110)],
        ),
        (
            1.0,
            &[
                (0, A121),
                (3, A124),
                (4, A125),
                (5, A126),
                (6, A127),
                (7, A128),
                (8, A129),
                (9, A1210),
                (10, A1211),
            ],
        ),
    ];
    for (s, (c, w)) in stages.iter().enumerate() {
        combine(&mut st.tmp, y, h, &st.k, w);
        let (_, rest) = st.k.split_at_mut(s + 1);
        f(t + c * h, &st.tmp, &mut rest[0]);
    }

    let n = y.len();
    let (mut err, mut err2) = (0.0, 0.0);
    for i in 0..n {
        let k = &st.k;
        let incr = k[0][i] * B1
            + k[5][i] * B6
            + k[6][i] * B7
            + k[7][i] * B8
            + k[8][i] * B9
            + k[9][i] * B10
            + k[10][i] * B11
            + k[11][i] * B12;
        st.y_new[i] = y[i] + incr * h;
        let e5 = incr - k[0][i] * BHH1 - k[8][i] * BHH2 - k[11][i] * BHH3;
        let e3 = k[0][i] * ER1
            + k[5][i] * ER6
            + k[6][i] * ER7
            + k[7][i] * ER8
            + k[8][i] * ER9
            + k[9][i] * ER10
            + k[10][i] * ER11
            + k[11][i] * ER12;
        let sk = opts.atol + opts.rtol * y[i].norm().max(st.y_new[i].norm());
        err += (e5.norm() / sk).powi(2);
        err2 += (e3.norm() / sk).powi(2);
    }
    let deno = err + 0.01 * err2;
    let deno = if deno > 0.0 { deno } else { 1.0 };
    h.abs() * err * (1.0 / (n as f64 * deno)).sqrt()
}

/// Starting step from the size of y and f(t0, y).
fn initial_step(y: &[C64], dy: &[C64], opts: &Options, span: f64) -> f64 {
    let scale = opts.atol + opts.rtol * max_norm(y);
    let d0 = max_norm(y) / scale;
    let d1 = max_norm(dy) / scale;
    let h = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 * span } else { 0.01 * d0 / d1 };
    h.min(span)
}

/// Integrates y' = f(t, y) from `t0` and returns the state at each of the
/// ascending output times `t_out` (all ≥ `t0`).
pub fn integrate<F>(
    mut f: F,
    t0: f64,
    y0: &[C64],
    t_out: &[f64],
    opts: &Options,
) -> Result<(Vec<Vec<C64>>, Stats)>
where
    F: FnMut(f64, &[C64], &mut [C64]),
{
    if !(opts.atol > 0.0 && opts.rtol >= 0.0) {
        return Err(Error::arg("integrator tolerances must be positive"));
    }
    if t_out.windows(2).any(|w| w[1] < w[0]) || t_out.first().is_some_and(|&t| t < t0) {
        return Err(Error::arg("output times must be ascending and not before the start time"));
    }
    let n = y0.len();
    let mut st = Stages::new(n);
    let mut stats = Stats::default();
    let mut y = y0.to_vec();
    let mut t = t0;
    let mut out = Vec::with_capacity(t_out.len());

    f(t, &y, &mut st.k[0]);
    stats.evaluations += 1;
    let span = t_out.last().map_or(0.0, |&t_end| t_end - t0);
    let mut h = opts.initial_step.unwrap_or_else(|| initial_step(&y, &st.k[0], opts, span.max(f64::MIN_POSITIVE)));
    if let Some(hmax) = opts.max_step {
        h = h.min(hmax);
    }

    for &target in t_out {
        while t < target {
            if stats.accepted + stats.rejected >= opts.max_steps {
                return Err(Error::Numerical(format!(
                    "step limit {} reached at t = {t:.6e}",
                    opts.max_steps
                )));
            }
            let remaining = target - t;
            let last = 1.01 * h >= remaining;
            let step = if last { remaining } else { h };
            if step <= 16.0 * f64::EPSILON * t.abs().max(f64::MIN_POSITIVE) {
                return Err(Error::Numerical(format!("step size underflow at t = {t:.6e}")));
            }

            let err = trial_step(&mut f, t, &y, step, &mut st, opts);
            stats.evaluations += 11;

            let fac11 = err.powf(0.125);
            if err <= 1.0 {
                stats.accepted += 1;
                t = if last { target } else { t + step };
                std::mem::swap(&mut y, &mut st.y_new);
                f(t, &y, &mut st.k[0]);
                stats.evaluations += 1;
                let fac = (fac11 / SAFE).clamp(1.0 / FAC_MAX, 1.0 / FAC_MIN);
                let grown = step / fac;
                // a truncated final step says nothing about the natural size
                h = if last { h.max(grown) } else { grown };
            } else {
                stats.rejected += 1;
                h = step / (fac11 / SAFE).min(1.0 / FAC_MIN);
            }
            if let Some(hmax) = opts.max_step {
                h = h.min(hmax);
            }
        }
        out.push(y.clone());
    }
    Ok((out, stats))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn exponential_decay() {
        let opts = Options { atol: 1e-13, rtol: 1e-13, ..Options::default() };
        let (ys, stats) = integrate(
            |_, y, dy| dy[0] = -y[0],
            0.0,
            &[C64::new(1.0, 0.0)],
            &[1.0, 5.0],
            &opts,
        )
        .unwrap();
        assert_abs_diff_eq!(ys[0][0].re, (-1f64).exp(), epsilon = 1e-12);
        assert_abs_diff_eq!(ys[1][0].re, (-5f64).exp(), epsilon = 1e-12);
        assert!(stats.rejected < stats.accepted);
    }

    #[test]
    fn complex_rotation_keeps_norm() {
        let w = 3.7;
        let (ys, _) = integrate(
            |_, y, dy| dy[0] = C64::new(0.0, w) * y[0],
            0.0,
            &[C64::new(1.0, 0.0)],
            &[100.0],
            &Options::default(),
        )
        .unwrap();
        let exact = C64::from_polar(1.0, w * 100.0);
        assert!((ys[0][0] - exact).norm() < 1e-9);
    }

    #[test]
    fn explicit_time_dependence() {
        // y' = cos t → y = sin t
        let (ys, _) = integrate(
            |t, _, dy| dy[0] = C64::new(t.cos(), 0.0),
            0.0,
            &[C64::new(0.0, 0.0)],
            &[0.5, 2.0, 7.0],
            &Options::default(),
        )
        .unwrap();
        for (y, t) in ys.iter().zip([0.5f64, 2.0, 7.0]) {
            assert_abs_diff_eq!(y[0].re, t.sin(), epsilon = 1e-11);
        }
    }

    #[test]
    fn reports_step_limit() {
        let opts = Options { max_steps: 5, ..Options::default() };
        let r = integrate(
            |_, y, dy| dy[0] = C64::new(0.0, 50.0) * y[0],
            0.0,
            &[C64::new(1.0, 0.0)],
            &[100.0],
            &opts,
        );
        assert!(matches!(r, Err(Error::Numerical(_))));
    }

    #[test]
    fn rejects_unsorted_times() {
        let r = integrate(|_, _, dy| dy[0] = C64::new(0.0, 0.0), 0.0, &[C64::new(1.0, 0.0)], &[2.0, 1.0], &Options::default());
        assert!(r.is_err());
    }

    #[test]
    fn singular_rhs_underflows() {
        // y' = 1/(1 − t)² blows up at t = 1
        let r = integrate(
            |t, _, dy| dy[0] = C64::new(1.0 / ((1.0 - t) * (1.0 - t)), 0.0),
            0.0,
            &[C64::new(1.0, 0.0)],
            &[2.0],
            &Options::default(),
        );
        assert!(matches!(r, Err(Error::Numerical(_))));
    }
}
