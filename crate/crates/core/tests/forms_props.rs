use cartan_forge::coframe::Coframe;
use cartan_forge::field::{Chart, Point, ScalarField};
use cartan_forge::forms::KForm;
use cartan_forge::random::{random_field, random_form};
use cartan_forge::revolution::{frame_bundle_cartan, LiftOrientation, SurfaceOfRevolution};
use cartan_forge::sampling::{SampleBox, Sampling};
use cartan_forge::structures::conformal_rescale;
use cartan_forge::transforms::TransformMatrix;
use proptest::prelude::*;
use rand::rngs::StdRng;
use rand::SeedableRng;

const G: Chart = Chart::Generic;

fn cube() -> SampleBox {
    SampleBox::new([-1.0; 3], [1.0; 3])
}

fn points(seed: u64) -> Vec<Point> {
    cube().random(25, seed)
}

fn sup_diff(a: &KForm, b: &KForm, pts: &[Point]) -> f64 {
    let d = a.sub(b).unwrap();
    pts.iter()
        .flat_map(|p| d.eval(*p).unwrap())
        .fold(0.0f64, |m, x| m.max(x.abs()))
}

fn sup_form(a: &KForm, pts: &[Point]) -> f64 {
    pts.iter().flat_map(|p| a.eval(*p).unwrap()).fold(0.0f64, |m, x| m.max(x.abs()))
}

/// Diagonally dominant coframe: `2 + 0.3 sin(·)` on the diagonal and
/// `0.3 sin(·)` off it.
fn random_coframe(rng: &mut StdRng) -> Coframe {
    let rows = std::array::from_fn(|i| {
        std::array::from_fn(|j| {
            let s = random_field(rng, 3, G).sin() * 0.3;
            if i == j {
                s + 2.0
            } else {
                s
            }
        })
    });
    Coframe::new(rows, cube())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn d_squared_vanishes(seed in any::<u64>(), degree in 0usize..2) {
        let mut rng = StdRng::seed_from_u64(seed);
        let u = random_form(&mut rng, degree, 4, G);
        let dd = u.exterior_derivative().unwrap().exterior_derivative().unwrap();
        prop_assert!(sup_form(&dd, &points(seed)) < 1e-10);
    }

    #[test]
    fn leibniz_rule(seed in any::<u64>(), ku in 0usize..3, kv in 0usize..2) {
        prop_assume!(ku + kv <= 2);
        let mut rng = StdRng::seed_from_u64(seed);
        let u = random_form(&mut rng, ku, 3, G);
        let v = random_form(&mut rng, kv, 3, G);
        let lhs = u.wedge(&v).unwrap().exterior_derivative().unwrap();
        let a = u.exterior_derivative().unwrap().wedge(&v).unwrap();
        let b = u.wedge(&v.exterior_derivative().unwrap()).unwrap();
        let rhs = if ku % 2 == 0 { a.add(&b) } else { a.sub(&b) }.unwrap();
        prop_assert!(sup_diff(&lhs, &rhs, &points(seed)) < 1e-10);
    }

    #[test]
    fn wedge_is_graded_commutative(seed in any::<u64>(), ku in 0usize..3, kv in 0usize..3) {
        prop_assume!(ku + kv <= 3);
        let mut rng = StdRng::seed_from_u64(seed);
        let u = random_form(&mut rng, ku, 3, G);
        let v = random_form(&mut rng, kv, 3, G);
        let uv = u.wedge(&v).unwrap();
        let vu = v.wedge(&u).unwrap();
        let vu = if (ku * kv) % 2 == 1 { vu.neg() } else { vu };
        prop_assert!(sup_diff(&uv, &vu, &points(seed)) < 1e-12);
    }

    #[test]
    fn mixed_partials_commute(seed in any::<u64>(), i in 0usize..3, j in 0usize..3, k in 0usize..3) {
        let mut rng = StdRng::seed_from_u64(seed);
        let f = random_field(&mut rng, 4, G);
        let a = f.partial(i).partial(j).partial(k);
        let b = f.partial(k).partial(i).partial(j);
        for p in points(seed) {
            prop_assert!((a.eval(p).unwrap() - b.eval(p).unwrap()).abs() < 1e-10);
        }
    }

    #[test]
    fn coframe_reconstructs_differentials(seed in any::<u64>()) {
        let mut rng = StdRng::seed_from_u64(seed);
        let cf = random_coframe(&mut rng);
        let f = random_field(&mut rng, 3, G);
        let df = KForm::Zero(f.clone()).exterior_derivative().unwrap();
        let rebuilt = cf.combine_one_form(&cf.derivatives(&f).as_array());
        let pts = points(seed);
        prop_assert!(sup_diff(&df, &rebuilt, &pts) < 1e-10);
        let w = random_form(&mut rng, 2, 3, G);
        let back = cf.combine_two_form(&cf.expand_two_form(&w).unwrap());
        prop_assert!(sup_diff(&w, &back, &pts) < 1e-10);
        let numeric = cf.derivatives_at_numeric(&f, pts[0]).unwrap();
        let symbolic = cf.derivatives(&f).as_array().map(|g| g.eval(pts[0]).unwrap());
        for (x, y) in numeric.iter().zip(symbolic) {
            prop_assert!((x - y).abs() < 1e-10);
        }
    }

    #[test]
    fn volume_is_multiplicative(seed in any::<u64>()) {
        let mut rng = StdRng::seed_from_u64(seed);
        let cf = random_coframe(&mut rng);
        let a = TransformMatrix::new(std::array::from_fn(|_| std::array::from_fn(|_| random_field(&mut rng, 2, G))));
        let omega = a.apply(&cf);
        let expected = a.det() * cf.volume_coefficient();
        for p in points(seed) {
            let (x, y) = (omega.volume_coefficient().eval(p).unwrap(), expected.eval(p).unwrap());
            prop_assert!((x - y).abs() < 1e-10 * (1.0 + y.abs()));
        }
    }

    #[test]
    fn conformal_round_trip(a in -1.0f64..1.0, b in -1.0f64..1.0, c in -3.0f64..3.0) {
        let s = SurfaceOfRevolution::round_sphere();
        let sampling = Sampling::random(&s.default_box(), 40, 5, 1e-8);
        let (cs, _) = frame_bundle_cartan(&s, LiftOrientation::Standard, Some(&sampling)).unwrap();
        let v = ScalarField::parse(
            &format!("1.5 + 0.4*sin({a}*r + {b}*cos(theta) + {c})"),
            Chart::FrameBundle,
        ).unwrap();
        let there = conformal_rescale(&cs, &v, &sampling).unwrap();
        let back = conformal_rescale(&there, &v.recip(), &sampling).unwrap();
        for p in &sampling.points {
            prop_assert!((back.r.eval(*p).unwrap() - cs.r.eval(*p).unwrap()).abs() < 1e-9);
            for i in 0..3 {
                for j in 0..3 {
                    let (x, y) = (back.coframe.rows()[i][j].eval(*p).unwrap(), cs.coframe.rows()[i][j].eval(*p).unwrap());
                    prop_assert!((x - y).abs() < 1e-10);
                }
            }
        }
    }
}
