//! Symmetric Gauss quadrature rules on the reference triangle.
//!
//! Points are stored as barycentric coordinates and the weights sum to one,
//! so a rule integrates `f` over a physical triangle as
//! `area * Σ w_i f(r_i)` with `r_i = Σ λ_ij v_j`.

/// Available rule sizes (number of points / polynomial degree integrated exactly).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub enum TriRule {
    /// 1 point, exact for degree 1.
    Centroid,
    /// 3 points, exact for degree 2.
    P3,
    /// 6 points, exact for degree 4.
    P6,
    /// 7 points, exact for degree 5.
    P7,
    /// 12 points, exact for degree 6.
    P12,
}

/// Quadrature selection for operator assembly: `far` is the product rule for
/// well-separated triangle pairs, `near` the test rule and smooth-remainder
/// source rule for close pairs (the static kernel is integrated analytically).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub struct QuadSpec {
    pub far: TriRule,
    pub near: TriRule,
}

impl QuadSpec {
    pub const DEFAULT: QuadSpec = QuadSpec { far: TriRule::P3, near: TriRule::P7 };
    /// Roughly doubled point counts, used for self-convergence checks.
    pub const HIGH: QuadSpec = QuadSpec { far: TriRule::P7, near: TriRule::P12 };

    /// Stable identifier used in operator-cache keys.
    pub fn id(&self) -> u32 {
        (rule(self.far).points.len() as u32) << 8 | rule(self.near).points.len() as u32
    }
}

impl Default for QuadSpec {
    fn default() -> Self {
        QuadSpec::DEFAULT
    }
}

pub struct RuleData {
    /// Barycentric coordinates (λ1, λ2, λ3).
    pub points: &'static [[f64; 3]],
    /// Weights summing to 1.
    pub weights: &'static [f64],
}

const CENTROID_PTS: [[f64; 3]; 1] = [[THIRD, THIRD, THIRD]];
const CENTROID_WTS: [f64; 1] = [1.0];

const THIRD: f64 = 1.0 / 3.0;

const P3_PTS: [[f64; 3]; 3] = [
    [2.0 / 3.0, 1.0 / 6.0, 1.0 / 6.0],
    [1.0 / 6.0, 2.0 / 3.0, 1.0 / 6.0],
    [1.0 / 6.0, 1.0 / 6.0, 2.0 / 3.0],
];
const P3_WTS: [f64; 3] = [THIRD, THIRD, THIRD];

// Dunavant degree-4 rule.
const P6_A1: f64 = 0.816_847_572_980_459;
const P6_B1: f64 = 0.091_576_213_509_771;
const P6_W1: f64 = 0.109_951_743_655_322;
const P6_A2: f64 = 0.108_103_018_168_070;
const P6_B2: f64 = 0.445_948_490_915_965;
const P6_W2: f64 = 0.223_381_589_678_011;
const P6_PTS: [[f64; 3]; 6] = [
    [P6_A1, P6_B1, P6_B1],
    [P6_B1, P6_A1, P6_B1],
    [P6_B1, P6_B1, P6_A1],
    [P6_A2, P6_B2, P6_B2],
    [P6_B2, P6_A2, P6_B2],
    [P6_B2, P6_B2, P6_A2],
];
const P6_WTS: [f64; 6] = [P6_W1, P6_W1, P6_W1, P6_W2, P6_W2, P6_W2];

// Dunavant degree-5 rule.
const P7_A1: f64 = 0.059_715_871_789_770;
const P7_B1: f64 = 0.470_142_064_105_115;
const P7_W1: f64 = 0.132_394_152_788_506;
const P7_A2: f64 = 0.797_426_985_353_087;
const P7_B2: f64 = 0.101_286_507_323_456;
const P7_W2: f64 = 0.125_939_180_544_827;
const P7_PTS: [[f64; 3]; 7] = [
    [THIRD, THIRD, THIRD],
    [P7_A1, P7_B1, P7_B1],
    [P7_B1, P7_A1, P7_B1],
    [P7_B1, P7_B1, P7_A1],
    [P7_A2, P7_B2, P7_B2],
    [P7_B2, P7_A2, P7_B2],
    [P7_B2, P7_B2, P7_A2],
];
const P7_WTS: [f64; 7] = [0.225, P7_W1, P7_W1, P7_W1, P7_W2, P7_W2, P7_W2];

// Dunavant degree-6 rule.
const P12_A1: f64 = 0.873_821_971_016_996;
const P12_B1: f64 = 0.063_089_014_491_502;
const P12_W1: f64 = 0.050_844_906_370_207;
const P12_A2: f64 = 0.501_426_509_658_179;
const P12_B2: f64 = 0.249_286_745_170_910;
const P12_W2: f64 = 0.116_786_275_726_379;
const P12_A3: f64 = 0.636_502_499_121_399;
const P12_B3: f64 = 0.310_352_451_033_785;
const P12_C3: f64 = 0.053_145_049_844_816;
const P12_W3: f64 = 0.082_851_075_618_374;
const P12_PTS: [[f64; 3]; 12] = [
    [P12_A1, P12_B1, P12_B1],
    [P12_B1, P12_A1, P12_B1],
    [P12_B1, P12_B1, P12_A1],
    [P12_A2, P12_B2, P12_B2],
    [P12_B2, P12_A2, P12_B2],
    [P12_B2, P12_B2, P12_A2],
    [P12_A3, P12_B3, P12_C3],
    [P12_A3, P12_C3, P12_B3],
    [P12_B3, P12_A3, P12_C3],
    [P12_B3, P12_C3, P12_A3],
    [P12_C3, P12_A3, P12_B3],
    [P12_C3, P12_B3, P12_A3],
];
const P12_WTS: [f64; 12] = [
    P12_W1, P12_W1, P12_W1, P12_W2, P12_W2, P12_W2, P12_W3, P12_W3, P12_W3, P12_W3, P12_W3,
    P12_W3,
];

pub fn rule(kind: TriRule) -> RuleData {
    match kind {
        TriRule::Centroid => RuleData { points: &CENTROID_PTS, weights: &CENTROID_WTS },
        TriRule::P3 => RuleData { points: &P3_PTS, weights: &P3_WTS },
        TriRule::P6 => RuleData { points: &P6_PTS, weights: &P6_WTS },
        TriRule::P7 => RuleData { points: &P7_PTS, weights: &P7_WTS },
        TriRule::P12 => RuleData { points: &P12_PTS, weights: &P12_WTS },
    }
}
