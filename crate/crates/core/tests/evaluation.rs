use hrtf_core::dsp::Direction;
use hrtf_core::eval::{self, ClusterLabel, EvalError, EvalRow};

// Reference values from scikit-learn's Lloyd k-means (same init) and a direct
// cross-correlation sum checked against scipy.signal.correlate.

fn values() -> Vec<f64> {
    (0..60).map(|i| (1.3 * i as f64).sin() + 0.25 * (5.1 * i as f64).sin()).collect()
}

#[test]
fn kmeans_matches_reference() {
    let r = eval::kmeans3_1d(&values()).unwrap();
    let want = [-0.77503317, 0.03381562, 0.8246684];
    for (c, w) in r.centroids.iter().zip(want) {
        assert!((c - w).abs() < 1e-7, "{:?}", r.centroids);
    }
    assert!((r.objective.last().unwrap() - 2.9256994766017175).abs() < 1e-10);
    let ranks: String = r
        .labels
        .iter()
        .map(|l| match l {
            ClusterLabel::MpdBetter => '0',
            ClusterLabel::Similar => '1',
            ClusterLabel::ApfBetter => '2',
        })
        .collect();
    assert_eq!(ranks, "121001210022100221012200122001220012200121001210022101220012");
}

#[test]
fn kmeans_is_order_free_and_monotone() {
    let v = values();
    let r = eval::kmeans3_1d(&v).unwrap();
    let mut rev = v.clone();
    rev.reverse();
    let rr = eval::kmeans3_1d(&rev).unwrap();
    for (a, b) in r.centroids.iter().zip(&rr.centroids) {
        assert!((a - b).abs() < 1e-14);
    }
    assert!(r.objective.windows(2).all(|w| w[1] <= w[0] + 1e-12));
    assert!(matches!(
        eval::kmeans3_1d(&[1.0, 2.0, 1.0]),
        Err(EvalError::DegenerateInput { distinct: 2 })
    ));
}

#[test]
fn ncc_matches_reference() {
    let g: Vec<f64> = (0..40).map(|n| (-(n as f64) / 7.0).exp() * (0.9 * n as f64).cos()).collect();
    let h: Vec<f64> = (0..50)
        .map(|m| (-((m as f64) - 3.0).abs() / 5.0).exp() * (0.6 * m as f64).sin())
        .collect();
    let r = eval::ncc(&g, &h, 20).unwrap();
    assert!((r.psi_star - 0.6272393508515226).abs() < 1e-14);
    assert_eq!(r.lag_at_peak, 3);
    assert_eq!(r.curve.len(), 41);
    assert!((r.curve[0] + 0.002126840788615682).abs() < 1e-14);
    assert!((r.curve[40] + 0.016142140632592204).abs() < 1e-14);
    // Cauchy-Schwarz
    assert!(r.curve.iter().all(|v| v.abs() <= 1.0 + 1e-12));
}

#[test]
fn eval_table_layout() {
    let rows = vec![EvalRow {
        direction: Direction::new(0.0, 45.0),
        psi_apf: 0.9,
        psi_mpd: 0.8,
        label: Some(ClusterLabel::ApfBetter),
    }];
    let csv = eval::eval_table(&rows).to_csv_string();
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), "azimuth_deg,elevation_deg,psi_apf,psi_mpd,psi_d,label");
    assert!(lines.next().unwrap().ends_with(",apf_better"));
}
