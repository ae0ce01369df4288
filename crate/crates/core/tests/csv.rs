use proptest::prelude::*;
use rcd_core::csv::{format_g17, read_trace, trace_to_string, HEADER};
use rcd_core::optim::{traces_bit_eq, IterationRecord};

fn record() -> impl Strategy<Value = IterationRecord> {
    (
        0usize..1000,
        0usize..1000,
        any::<f64>().prop_filter("finite", |x| x.is_finite()),
        prop::option::of(0.0f64..1e6),
        prop::option::of(prop::num::f64::POSITIVE | prop::num::f64::ZERO),
        any::<u64>(),
        prop::option::of(any::<u64>()),
    )
        .prop_map(|(k, s, f, grad_norm, feasibility, flops, wall_ns)| IterationRecord {
            k,
            s,
            f,
            grad_norm,
            feasibility,
            flops,
            wall_ns,
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn g17_round_trips_bitwise(x in any::<f64>().prop_filter("finite", |x| x.is_finite())) {
        let back: f64 = format_g17(x).parse().unwrap();
        prop_assert_eq!(back.to_bits(), x.to_bits());
    }

    #[test]
    fn g17_has_at_most_seventeen_significant_digits(x in any::<f64>().prop_filter("finite", |x| x.is_finite() && *x != 0.0)) {
        let s = format_g17(x);
        let mantissa = s.split('e').next().unwrap();
        let digits: String = mantissa.chars().filter(|c| c.is_ascii_digit()).collect();
        prop_assert!(digits.trim_start_matches('0').len() <= 17, "{}", s);
    }

    #[test]
    fn traces_round_trip(trace in prop::collection::vec(record(), 0..20)) {
        let text = trace_to_string(&trace);
        prop_assert!(text.starts_with(HEADER));
        let back = read_trace(text.as_bytes()).unwrap();
        prop_assert!(traces_bit_eq(&trace, &back));
    }
}

#[test]
fn special_values() {
    assert_eq!(format_g17(f64::INFINITY), "inf");
    assert_eq!(format_g17(f64::NEG_INFINITY), "-inf");
    assert_eq!(format_g17(f64::NAN), "nan");
    assert_eq!(format_g17(-0.0), "-0");
    assert_eq!(format_g17(5e-324), "4.9406564584124654e-324");
    assert_eq!(format_g17(f64::MAX), "1.7976931348623157e+308");
    assert_eq!(format_g17(0.00012), "0.00012");
    assert_eq!(format_g17(1.0 / 3.0), "0.33333333333333331");
}

#[test]
fn malformed_traces_are_rejected() {
    assert!(read_trace("k,s,f\n".as_bytes()).is_err());
    let short = format!("{HEADER}\n0,0,1.5,,,0\n");
    assert!(read_trace(short.as_bytes()).is_err());
    let bad_float = format!("{HEADER}\n0,0,abc,,,0,\n");
    assert!(read_trace(bad_float.as_bytes()).is_err());
    let ok = format!("{HEADER}\n0,0,1.5,,,0,\n");
    assert_eq!(read_trace(ok.as_bytes()).unwrap().len(), 1);
}
