use proptest::prelude::*;
use standbyrel::core::Distribution;
use standbyrel::literal::{parse_distribution, parse_number, parse_sample};
use standbyrel::output::{format_float, Cell, Table};

proptest! {
    #[test]
    fn floats_round_trip_through_text(x in any::<f64>().prop_filter("finite", |x| x.is_finite())) {
        let text = format_float(x);
        prop_assert_eq!(text.parse::<f64>().unwrap().to_bits(), x.to_bits());
        prop_assert_eq!(parse_number(&text).unwrap().to_bits(), x.to_bits());
    }

    #[test]
    fn csv_cells_round_trip(xs in prop::collection::vec(-1e300f64..1e300, 1..20)) {
        let mut table = Table::new(vec!["v"]);
        for &x in &xs {
            table.push(vec![Cell::from(x)]);
        }
        let mut buf = Vec::new();
        table.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let back: Vec<f64> = text.lines().skip(1).map(|l| l.parse().unwrap()).collect();
        prop_assert_eq!(back, xs);
    }

    #[test]
    fn exponential_literals_parse(rate in 1e-6f64..1e6) {
        let d = parse_distribution(&format!("exp:{}", format_float(rate))).unwrap();
        prop_assert_eq!(d, Distribution::exponential(rate).unwrap());
    }

    #[test]
    fn samples_parse_line_by_line(xs in prop::collection::vec(0.0f64..1e6, 1..50)) {
        let text: String = xs.iter().map(|x| format!("{}\n", format_float(*x))).collect();
        prop_assert_eq!(parse_sample(&format!("# header\n{text}")).unwrap(), xs);
    }
}
