//! Quadrature rules on the reference triangle and the unit segment.
//!
//! Triangle rules are collapsed tensor-product Gauss rules (Duffy transform
//! of an `m x m` Gauss-Legendre grid on the unit square). They have strictly
//! positive weights and integrate total degree `2m - 2` exactly, so an
//! `m = ceil((d + 2) / 2)` grid covers degree `d`.

/// Domain of integration for a rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QuadDomain {
    /// Reference triangle (0,0)-(1,0)-(0,1), measure 1/2.
    Triangle,
    /// Unit segment [0,1], measure 1.
    Segment,
}

/// Points and weights on a reference domain, exact up to `degree`.
#[derive(Debug, Clone)]
pub struct QuadratureRule {
    pub domain: QuadDomain,
    pub degree: usize,
    /// (x, y) in the reference triangle, or (t, 0) on the segment.
    pub points: Vec<[f64; 2]>,
    /// Weights summing to the reference measure.
    pub weights: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UnsupportedDegree {
    pub domain: QuadDomain,
    pub degree: usize,
}

impl std::fmt::Display for UnsupportedDegree {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "no {:?} quadrature rule of degree {}", self.domain, self.degree)
    }
}

impl std::error::Error for UnsupportedDegree {}

pub const MAX_TRIANGLE_DEGREE: usize = 14;
pub const MAX_SEGMENT_DEGREE: usize = 15;

/// Gauss-Legendre nodes/weights on [-1,1] for n = 1..=8 points.
fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    match n {
        1 => (vec![0.0], vec![2.0]),
        2 => {
            let a = 0.577_350_269_189_625_8;
            (vec![-a, a], vec![1.0, 1.0])
        }
        3 => {
            let a = 0.774_596_669_241_483_4;
            (vec![-a, 0.0, a], vec![5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0])
        }
        4 => {
            let a = 0.861_136_311_594_052_6;
            let b = 0.339_981_043_584_856_3;
            let wa = 0.347_854_845_137_453_9;
            let wb = 0.652_145_154_862_546_2;
            (vec![-a, -b, b, a], vec![wa, wb, wb, wa])
        }
        5 => {
            let a = 0.906_179_845_938_664;
            let b = 0.538_469_310_105_683_1;
            let wa = 0.236_926_885_056_189_08;
            let wb = 0.478_628_670_499_366_47;
            let w0 = 0.568_888_888_888_888_9;
            (vec![-a, -b, 0.0, b, a], vec![wa, wb, w0, wb, wa])
        }
        6 => {
            let a = 0.932_469_514_203_152_1;
            let b = 0.661_209_386_466_264_5;
            let c = 0.238_619_186_083_196_9;
            let wa = 0.171_324_492_379_170_28;
            let wb = 0.360_761_573_048_138_6;
            let wc = 0.467_913_934_572_691_32;
            (vec![-a, -b, -c, c, b, a], vec![wa, wb, wc, wc, wb, wa])
        }
        7 => {
            let a = 0.949_107_912_342_758_5;
            let b = 0.741_531_185_599_394_4;
            let c = 0.405_845_151_377_397_17;
            let wa = 0.129_484_966_168_869_7;
            let wb = 0.279_705_391_489_276_7;
            let wc = 0.381_830_050_505_118_94;
            let w0 = 0.417_959_183_673_469_4;
            (vec![-a, -b, -c, 0.0, c, b, a], vec![wa, wb, wc, w0, wc, wb, wa])
        }
        8 => {
            let a = 0.960_289_856_497_536_2;
            let b = 0.796_666_477_413_626_7;
            let c = 0.525_532_409_916_329;
            let d = 0.183_434_642_495_649_8;
            let wa = 0.101_228_536_290_376_26;
            let wb = 0.222_381_034_453_374_47;
            let wc = 0.313_706_645_877_887_26;
            let wd = 0.362_683_783_378_362;
            (vec![-a, -b, -c, -d, d, c, b, a], vec![wa, wb, wc, wd, wd, wc, wb, wa])
        }
        _ => panic!("gauss_legendre: unsupported point count {n}"),
    }
}

/// Rule on a reference domain, exact for polynomials of total degree `degree`.
pub fn quadrature(domain: QuadDomain, degree: usize) -> Result<QuadratureRule, UnsupportedDegree> {
    match domain {
        QuadDomain::Segment => {
            if degree > MAX_SEGMENT_DEGREE {
                return Err(UnsupportedDegree { domain, degree });
            }
            // n-point Gauss is exact to degree 2n-1 on the segment.
            let n = degree / 2 + 1;
            let (xs, ws) = gauss_legendre(n);
            let points = xs.iter().map(|&x| [0.5 * (x + 1.0), 0.0]).collect();
            let weights = ws.iter().map(|&w| 0.5 * w).collect();
            Ok(QuadratureRule { domain, degree, points, weights })
        }
        QuadDomain::Triangle => {
            if degree > MAX_TRIANGLE_DEGREE {
                return Err(UnsupportedDegree { domain, degree });
            }
            // Duffy map (u,v) -> (u, v(1-u)) carries the Jacobian (1-u),
            // raising the u-degree by one; m points handle 2m-2.
            let m = (degree + 2).div_ceil(2);
            let (xs, ws) = gauss_legendre(m);
            let u: Vec<f64> = xs.iter().map(|&x| 0.5 * (x + 1.0)).collect();
            let wu: Vec<f64> = ws.iter().map(|&w| 0.5 * w).collect();
            let mut points = Vec::with_capacity(m * m);
            let mut weights = Vec::with_capacity(m * m);
            for i in 0..m {
                for j in 0..m {
                    points.push([u[i], u[j] * (1.0 - u[i])]);
                    weights.push(wu[i] * wu[j] * (1.0 - u[i]));
                }
            }
            Ok(QuadratureRule { domain, degree, points, weights })
        }
    }
}

impl QuadratureRule {
    /// Integral of `f` over the reference domain.
    pub fn integrate(&self, mut f: impl FnMut(f64, f64) -> f64) -> f64 {
        self.points
            .iter()
            .zip(&self.weights)
            .map(|(p, w)| w * f(p[0], p[1]))
            .sum()
    }
}
