use nested_polar::relay::{
    build_relay_scheme, build_relay_scheme_for_budget, build_relay_scheme_for_target, simulate_relay,
    RelayChannelSpec, RelayRunReport,
};
use proptest::prelude::*;

fn regime_one() -> RelayChannelSpec {
    RelayChannelSpec::from_direct(0.1, 0.5, 0.5).unwrap()
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

#[test]
fn rate_is_the_exact_reduced_fraction() {
    for (n, blocks) in [(6, 1), (8, 3), (10, 8), (11, 5)] {
        let s = build_relay_scheme(&regime_one(), n, blocks, 0.8).unwrap();
        let num = blocks as u64 * s.source().a().len() as u64;
        let den = (1u64 << n) * (blocks as u64 + 1);
        let g = gcd(num, den);
        let r = s.achieved_rate();
        assert_eq!((r.num, r.den), (num / g, den / g));
        assert_eq!(r.num * den, num * r.den);
    }
}

#[test]
fn constructed_sets_are_nested_and_within_targets() {
    let spec = regime_one();
    for n in [8, 10, 12] {
        let s = build_relay_scheme_for_budget(&spec, n, 8, 0.01).unwrap();
        assert!(s.source().b().is_subset(s.source().a()));
        assert_eq!(s.rd_code().dimension(), s.source().message_len());
        assert!(s.stage_bounds(&spec).unwrap().iter().all(|&b| b <= 0.01));

        let t = build_relay_scheme_for_target(&spec, n, 8, 0.05).unwrap();
        let bounds = t.stage_bounds(&spec).unwrap();
        assert!(bounds.iter().sum::<f64>() * 8.0 <= 0.05 + 1e-12, "{bounds:?}");
        assert!(t.source().a().len() <= s.source().a().len());
    }
}

#[test]
fn noiseless_links_never_fail() {
    let spec = RelayChannelSpec::new(0.0, 0.0, 0.0).unwrap();
    let s = build_relay_scheme(&spec, 7, 4, 1.0).unwrap();
    let r = simulate_relay(&s, &spec, 20, 3).unwrap();
    assert_eq!(r.stage_errors(), (0, 0, 0));
    assert_eq!(r.overall_error_rate, 0.0);
    assert_eq!(r.outcomes.len(), 20 * 4);
}

fn flags(r: &RelayRunReport) -> Vec<[bool; 3]> {
    r.outcomes.iter().map(|o| [o.relay_error, o.rd_error, o.dest_error]).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn worse_links_never_remove_errors(
        seed in any::<u64>(),
        which in 0usize..3,
        bump in 0.0f64..0.3,
    ) {
        let base = [0.1, 0.3, 0.4];
        let mut worse = base;
        worse[which] = (worse[which] + bump).min(1.0);
        let lo = RelayChannelSpec::new(base[0], base[1], base[2]).unwrap();
        let hi = RelayChannelSpec::new(worse[0], worse[1], worse[2]).unwrap();
        let scheme = build_relay_scheme_for_budget(&lo, 7, 3, 0.05).unwrap();
        let a = simulate_relay(&scheme, &lo, 30, seed).unwrap();
        let b = simulate_relay(&scheme, &hi, 30, seed).unwrap();
        for (x, y) in flags(&a).iter().zip(flags(&b)) {
            for k in 0..3 {
                prop_assert!(!x[k] || y[k], "{:?} -> {:?}", x, y);
            }
        }
        let (sa, sb) = (a.stage_errors(), b.stage_errors());
        prop_assert!(sa.0 <= sb.0 && sa.1 <= sb.1 && sa.2 <= sb.2);
    }
}

#[test]
fn reruns_are_identical() {
    let spec = regime_one();
    let s = build_relay_scheme_for_budget(&spec, 8, 4, 0.01).unwrap();
    let csv = |seed| {
        let mut buf = Vec::new();
        simulate_relay(&s, &spec, 40, seed).unwrap().write_csv(&mut buf).unwrap();
        buf
    };
    assert_eq!(csv(17), csv(17));
    assert_ne!(csv(17), csv(18));
}
