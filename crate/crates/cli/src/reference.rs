//! Published four-decimal values for the birth-death chain with `p = 0.3`.

/// One row: `(k, D, N, lambda)`; `lambda` is undefined at `k = 0`.
pub type ReferenceRow = (u32, f64, f64, Option<f64>);

pub const REFERENCE_P: f64 = 0.3;

/// Rounding granularity of the published values.
pub const REFERENCE_TOL: f64 = 5e-4;

pub const REFERENCE_090: [ReferenceRow; 11] = [
    (0, 0.0, 1.0, None),
    (1, 0.0, 0.5400, Some(1.0989)),
    (2, 0.4576, 0.1236, Some(4.1021)),
    (3, 0.7695, 0.0475, Some(9.2839)),
    (4, 1.0066, 0.0220, Some(16.2509)),
    (5, 1.1844, 0.0111, Some(24.4478)),
    (6, 1.3130, 0.0058, Some(33.4121)),
    (7, 1.4029, 0.0031, Some(42.8289)),
    (8, 1.4638, 0.0017, Some(52.5042)),
    (9, 1.5040, 0.0009, Some(62.3245)),
    (10, 1.5298, 0.0005, Some(72.2255)),
];

pub const REFERENCE_095: [ReferenceRow; 11] = [
    (0, 0.0, 1.0, None),
    (1, 0.0, 0.5700, Some(1.1050)),
    (2, 0.4790, 0.1365, Some(4.3657)),
    (3, 0.8282, 0.0565, Some(10.6058)),
    (4, 1.1218, 0.0288, Some(19.9550)),
    (5, 1.3715, 0.0163, Some(32.0869)),
    (6, 1.5811, 0.0098, Some(46.4727)),
    (7, 1.7536, 0.0061, Some(62.5651)),
    (8, 1.8927, 0.0039, Some(79.8921)),
    (9, 2.0028, 0.0025, Some(98.0854)),
    (10, 2.0884, 0.0016, Some(116.8739)),
];

/// The `k = 10` distortion is printed as `3.0000`; the exact value is `99 / 30`.
pub const REFERENCE_100: [ReferenceRow; 11] = [
    (0, 0.0, 1.0, None),
    (1, 0.0, 0.6000, Some(1.1111)),
    (2, 0.5000, 0.1500, Some(4.6667)),
    (3, 0.8889, 0.0667, Some(12.3810)),
    (4, 1.2500, 0.0375, Some(25.9259)),
    (5, 1.6000, 0.0240, Some(46.9697)),
    (6, 1.9444, 0.0167, Some(77.1795)),
    (7, 2.2857, 0.0122, Some(118.2222)),
    (8, 2.6250, 0.0094, Some(171.7647)),
    (9, 2.9630, 0.0074, Some(239.4737)),
    (10, 3.0000, 0.0060, Some(323.0159)),
];

pub const REFERENCE_TABLES: [(f64, &[ReferenceRow; 11]); 3] = [
    (0.9, &REFERENCE_090),
    (0.95, &REFERENCE_095),
    (1.0, &REFERENCE_100),
];

/// Worked costly example: `beta = 0.9`, `lambda = 20`.
pub const WORKED_COSTLY: (f64, f64, u32, f64) = (0.9, 20.0, 5, 1.4064);

/// Worked constrained example: `beta = 0.9`, `alpha = 0.1` gives `(k*, theta*, D*)`.
pub const WORKED_CONSTRAINED: (f64, f64, u32, f64, f64) = (0.9, 0.1, 2, 0.6899, 0.5543);
