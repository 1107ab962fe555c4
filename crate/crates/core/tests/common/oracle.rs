//! Wake-model values evaluated independently at 40 significant digits from
//! the closed-form expressions (D = 178.3 m, z_h = 119 m, default κ).

use farmctl::wake::*;

// (C_T, γ, I, x/D, y/D, (z − z_h)/D) -> [k_w, x0, σ_y, σ_z, δ, W], evaluated
// at 40 significant digits from the closed-form expressions.
#[rustfmt::skip]
pub const POINTS: [(f64, f64, f64, f64, f64, f64, [f64; 6]); 22] = [
    (0.8, 0.0, 0.06, 5.0, 0.0, 0.0, [0.0268, 213.98552020780647, 80.668122265865845, 80.668122265865845, 0.0, 0.28483463135467467]),
    (0.8, 0.0, 0.06, 7.0, 0.3, 0.1, [0.0268, 213.98552020780647, 90.133715255997609, 90.133715255997609, 0.0, 0.18075507886283498]),
    (0.8, 20.0, 0.06, 5.0, 0.2, 0.0, [0.0268, 201.08061429430962, 77.243184843797625, 81.006666843653013, 31.180864222363423, 0.27664283871886429]),
    (0.8, -20.0, 0.06, 5.0, -0.2, 0.0, [0.0268, 201.08061429430962, 77.243184843797625, 81.006666843653013, -31.180864222363423, 0.27664283871886429]),
    (0.75, 25.0, 0.08, 8.0, 0.4, -0.2, [0.0344, 181.03076720620832, 99.404515796662676, 105.25137834664053, 43.217332214537769, 0.12584015039661045]),
    (0.6, 10.0, 0.1, 3.0, 0.0, 0.0, [0.042, 198.63753340953718, 76.637549766265252, 77.585621939538408, 6.9569243805207291, 0.22120811923591252]),
    (0.6, 30.0, 0.1, 10.0, 0.5, 0.2, [0.042, 174.67891530257568, 121.59470641282248, 129.95539108965459, 40.286201696703765, 0.060072576919431159]),
    (0.5, -30.0, 0.04, 6.0, -0.4, 0.1, [0.0192, 274.3997050368751, 69.355316049458044, 77.71600072629015, -34.429018356153125, 0.14790196502855475]),
    (0.85, 15.0, 0.05, 4.0, 0.1, 0.05, [0.023, 209.11690963282683, 72.108295682392296, 74.23469449282299, 22.488536430540094, 0.37163912434252673]),
    (0.7, 5.0, 0.12, 12.0, 0.0, 0.3, [0.0496, 173.66617032734666, 159.67799200027292, 159.91546186585754, 8.3857012860741514, 0.052709487438650319]),
    (0.4, 0.0, 0.07, 2.0, 0.2, 0.0, [0.0306, 263.85434227867731, 67.788292241023765, 67.788292241023765, 0.0, 0.16652983059698258]),
    (0.9, 22.0, 0.06, 9.0, 0.3, -0.1, [0.0268, 175.63935497473531, 96.161312715378401, 100.70540427113803, 55.496580054231999, 0.18611005919534333]),
    (0.3, -12.0, 0.09, 15.0, -0.1, 0.0, [0.0382, 240.69833950803832, 154.01253249130073, 155.37623146750759, -10.873433540275215, 0.02464420842808487]),
    (0.8, 28.0, 0.03, 1.0, 0.05, 0.0, [0.0154, 240.51717549273035, 56.566111999404914, 63.870767467043579, 13.588893413049064, 0.52589367058122166]),
    (0.65, -8.0, 0.06, 5.5, 0.0, -0.25, [0.0268, 240.51764339705041, 81.707889824210444, 82.315210994392748, -11.046613212797395, 0.18210213677731885]),
    (0.78, 18.0, 0.11, 7.5, 0.6, 0.2, [0.0458, 161.85996433500161, 113.19473376080681, 116.24905186140775, 27.972369337170283, 0.08906591231954113]),
    (0.55, 0.0, 0.05, 20.0, 1.0, 0.5, [0.023, 280.15158316092821, 137.97951362797755, 137.97951362797755, 0.0, 0.020830716009984204]),
    (0.82, -25.0, 0.07, 3.5, -0.3, 0.0, [0.0306, 178.96540032100199, 70.609694246337748, 76.456556796315607, -28.454049987938753, 0.30705970757011723]),
    (0.72, 12.0, 0.065, 6.5, 0.15, 0.15, [0.0287, 218.00966498828813, 88.072351974700615, 89.436050950907474, 20.197669769623019, 0.18793158223124045]),
    (0.88, -5.0, 0.045, 11.0, 0.0, 0.0, [0.0211, 214.95409406762404, 99.015638526232694, 99.253108391817314, -16.770748666219809, 0.19375810674061756]),
    (0.45, 27.0, 0.085, 4.5, 0.35, -0.05, [0.0363, 209.94977668603196, 77.336689429177888, 84.138427287202791, 18.607614416599569, 0.1109785568348945]),
    (0.8, 20.0, 0.06, 0.5, 0.02, 0.0, [0.0268, 201.08061429430962, 60.685435111189874, 64.448917111045261, 4.9901166893445488, 0.51387020837300206]),
];

// (C_T, I∞, x/D) -> [I+, I_rotor]
#[rustfmt::skip]
pub const CRESPO: [(f64, f64, f64, [f64; 2]); 4] = [
    (0.8, 0.06, 5.0, [0.13646268106533659, 0.14907066553665001]),
    (0.8, 0.06, 10.0, [0.10931614321656082, 0.12469971598902556]),
    (0.5, 0.1, 3.0, [0.096287983908418113, 0.13882138108068146]),
    (0.3, 0.04, 8.0, [0.041994559759907065, 0.057996060637153673]),
];

fn rel(a: f64, b: f64) -> f64 {
    if b == 0.0 {
        a.abs()
    } else {
        ((a - b) / b).abs()
    }
}

/// Largest relative error over all oracle quantities, and the number of
/// parameter points compared.
pub fn wake_oracle_max_error() -> (f64, usize) {
    let (d, zh) = (178.3, 119.0);
    let p = WakeParams::default();
    let mut worst: f64 = 0.0;
    for &(ct, yaw, i, xd, yd, zd, want) in &POINTS {
        let k_w = wake_expansion(i, &p).unwrap();
        let x0 = near_wake_length(ct, yaw, i, p.alpha, p.beta, d).unwrap();
        let x = xd * d;
        let (sy, sz) = wake_widths(x, yaw, k_w, x0, d);
        let delta = deflection(x, yaw, ct, k_w, x0, sy, sz, d);
        let (w, _) = deficit(yd * d, zh + zd * d, yaw, ct, sy, sz, delta, zh, d);
        for (g, e) in [k_w, x0, sy, sz, delta, w].iter().zip(want) {
            worst = worst.max(rel(*g, e));
        }
    }
    for &(ct, ti, xd, [plus, _]) in &CRESPO {
        worst = worst.max(rel(crespo_added(ct, ti, xd * d, d), plus));
    }
    (worst, POINTS.len())
}
