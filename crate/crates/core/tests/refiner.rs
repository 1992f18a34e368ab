mod common;

use proptest::prelude::*;

use timed_nav::planner::{plan, ActionKind, Mode};
use timed_nav::refiner::refine_plan;

use common::small_instance;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn reference_respects_bounds_and_rests_between_segments(
        seed in 0u64..10_000,
        a_max in prop::sample::select(vec![2.0, 5.0, 8.0, 15.0]),
    ) {
        let Some(inst) = small_instance(seed, 8, 3, 10.0) else { return Ok(()) };
        let Some(p) = plan(&inst, Mode::Aat, 0.0, 1.0, std::f64::consts::PI) else { return Ok(()) };
        let r = refine_plan(&p, a_max, 1.0).unwrap();
        prop_assert!(r.end_time() >= p.arrival_time - 1e-9);
        prop_assert!((r.end_time() - p.arrival_time - r.overrun()).abs() < 1e-9);

        let s0 = r.sample(0.0);
        prop_assert!(s0.position().distance(p.start.pos()) < 1e-9);
        let end = r.sample(r.end_time() + 1.0);
        prop_assert!(end.position().distance(p.goal().pos()) < 1e-9);
        prop_assert!(end.vel.iter().all(|v| v.abs() < 1e-12));

        for span in &r.segments {
            let at = r.sample(span.t_start);
            prop_assert!(at.vel.iter().all(|v| v.abs() < 1e-9), "moving at segment start {at:?}");
        }

        // Finite differences agree with the analytic derivatives, and no axis
        // accelerates harder than a_max.
        let h = 1e-5;
        let n = (r.end_time() / 0.01) as usize;
        for k in 0..n {
            let t = k as f64 * 0.01 + 0.003;
            let s = r.sample(t);
            prop_assert!(s.acc[0].abs() <= a_max + 1e-9 && s.acc[1].abs() <= a_max + 1e-9);
            // Keeping the planned timing needs a cruise above v_max, but never
            // twice the average speed.
            prop_assert!(s.vel[0].abs() <= 2.0 + 1e-9 && s.vel[1].abs() <= 2.0 + 1e-9);
            let (lo, hi) = (r.sample(t - h), r.sample(t + h));
            for i in 0..3 {
                let fd = (hi.pos[i] - lo.pos[i]) / (2.0 * h);
                prop_assert!((fd - s.vel[i]).abs() < 1e-4, "axis {i} t {t}: {fd} vs {}", s.vel[i]);
            }
        }
    }
}

#[test]
fn translations_follow_the_straight_line() {
    let inst = small_instance(3, 8, 0, 10.0).unwrap();
    let p = plan(&inst, Mode::Aa, 0.0, 1.0, std::f64::consts::PI).unwrap();
    let r = refine_plan(&p, 5.0, 1.0).unwrap();
    for (a, span) in p.actions.iter().zip(&r.segments) {
        if a.kind != ActionKind::Translate {
            continue;
        }
        let (s, e) = (a.start.pos(), a.end.pos());
        let dir = e - s;
        for k in 0..=50 {
            let t = span.t_start + (span.t_end - span.t_start) * k as f64 / 50.0;
            let q = r.sample(t).position() - s;
            assert!(dir.cross(q).abs() / dir.norm() < 1e-9, "reference leaves the segment at t = {t}");
        }
    }
}
