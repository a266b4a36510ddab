use hrtf_core::dsp::{CoordinateSystem, Direction, Ear};
use hrtf_core::fbs;
use hrtf_core::io::{select_plane, Plane};
use hrtf_core::render::{
    render, DirectionResolver, FbsResolver, FilterBank, RenderConfig, RenderError, Trajectory, TrajectoryPoint,
};
use hrtf_core::synth;

const FS: f64 = 44100.0;

fn direct(x: &[f64], h: &[f64]) -> Vec<f64> {
    let mut y = vec![0.0; x.len() + h.len() - 1];
    for (i, &a) in x.iter().enumerate() {
        for (j, &b) in h.iter().enumerate() {
            y[i + j] += a * b;
        }
    }
    y
}

fn max_err(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(p, q)| (p - q).abs()).fold(0.0, f64::max)
}

fn two_filters() -> (Vec<f64>, Vec<f64>, Vec<f64>, Vec<f64>) {
    let mut rng = synth::rng(11);
    (
        synth::random_hrir(&mut rng, 200),
        synth::random_hrir(&mut rng, 200),
        synth::random_hrir(&mut rng, 150),
        synth::random_hrir(&mut rng, 200),
    )
}

#[test]
fn static_render_is_plain_convolution() {
    let (l, r, _, _) = two_filters();
    let x = synth::noise(&mut synth::rng(3), 10_000, 0.3);
    let mut bank = FilterBank::new(FS);
    let d = Direction::new(30.0, 0.0);
    bank.insert(d, l.clone(), r.clone());
    let (want_l, want_r) = (direct(&x, &l), direct(&x, &r));
    for block in [1, 7, 199, 256, 4096, 20_000] {
        let cfg = RenderConfig { block_size: block, xfade: 0 };
        let y = render(&x, FS, &Trajectory::fixed(d), &bank, &cfg).unwrap();
        assert!(max_err(&y.left, &want_l) < 1e-10, "block {block}");
        assert!(max_err(&y.right, &want_r) < 1e-10, "block {block}");
    }
}

#[test]
fn hard_switch_is_the_sum_of_segments() {
    let (l1, r1, l2, r2) = two_filters();
    let (a, b) = (Direction::new(0.0, 0.0), Direction::new(10.0, 0.0));
    let mut bank = FilterBank::new(FS);
    bank.insert(a, l1.clone(), r1.clone());
    bank.insert(b, l2.clone(), r2.clone());
    let x = synth::noise(&mut synth::rng(4), 3000, 1.0);
    let switch = 1234;
    let traj = Trajectory::new(vec![
        TrajectoryPoint { start_sample: 0, direction: a },
        TrajectoryPoint { start_sample: switch, direction: b },
    ])
    .unwrap();
    let y = render(&x, FS, &traj, &bank, &RenderConfig { block_size: 512, xfade: 0 }).unwrap();
    let mut want = vec![0.0; x.len() + 199];
    for (i, v) in direct(&x[..switch], &l1).into_iter().enumerate() {
        want[i] += v;
    }
    for (i, v) in direct(&x[switch..], &l2).into_iter().enumerate() {
        want[switch + i] += v;
    }
    assert!(max_err(&y.left, &want) < 1e-10);
    assert_eq!(y.right.len(), want.len());
}

#[test]
fn crossfade_ramps_sum_to_one() {
    let (l, r, _, _) = two_filters();
    let mut bank = FilterBank::new(FS);
    let traj = Trajectory::azimuth_sweep(5000, Direction::new(0.0, 0.0), 1.0, 20).unwrap();
    for p in traj.points() {
        bank.insert(p.direction, l.clone(), r.clone());
    }
    let x = synth::noise(&mut synth::rng(5), 5000, 1.0);
    let y = render(&x, FS, &traj, &bank, &RenderConfig { block_size: 1024, xfade: 64 }).unwrap();
    assert!(max_err(&y.left, &direct(&x, &l)) < 1e-10);
    assert!(max_err(&y.right, &direct(&x, &r)) < 1e-10);
}

#[test]
fn linear_in_the_input() {
    let (l1, r1, l2, r2) = two_filters();
    let mut bank = FilterBank::new(FS);
    let traj = Trajectory::azimuth_sweep(4000, Direction::new(0.0, 0.0), 5.0, 4).unwrap();
    for (i, p) in traj.points().iter().enumerate() {
        if i % 2 == 0 {
            bank.insert(p.direction, l1.clone(), r1.clone());
        } else {
            bank.insert(p.direction, l2.clone(), r2.clone());
        }
    }
    let cfg = RenderConfig { block_size: 333, xfade: 100 };
    let x1 = synth::noise(&mut synth::rng(6), 4000, 1.0);
    let x2 = synth::noise(&mut synth::rng(7), 4000, 1.0);
    let mix: Vec<f64> = x1.iter().zip(&x2).map(|(a, b)| 2.0 * a - 0.5 * b).collect();
    let (y1, y2, ym) = (
        render(&x1, FS, &traj, &bank, &cfg).unwrap(),
        render(&x2, FS, &traj, &bank, &cfg).unwrap(),
        render(&mix, FS, &traj, &bank, &cfg).unwrap(),
    );
    let want: Vec<f64> = y1.left.iter().zip(&y2.left).map(|(a, b)| 2.0 * a - 0.5 * b).collect();
    assert!(max_err(&ym.left, &want) < 1e-10);
}

#[test]
fn energy_bounded_by_the_filter_peak_gain() {
    let (l, r, _, _) = two_filters();
    let mut bank = FilterBank::new(FS);
    bank.insert(Direction::default(), l.clone(), r);
    let x = synth::noise(&mut synth::rng(8), 8192, 0.5);
    let y = render(&x, FS, &Trajectory::fixed(Direction::default()), &bank, &RenderConfig::default()).unwrap();
    let peak = hrtf_core::dsp::fft::rfft(&{
        let mut p = l.clone();
        p.resize(1 << 16, 0.0);
        p
    })
    .iter()
    .map(|c| c.norm())
    .fold(0.0, f64::max);
    let ex: f64 = x.iter().map(|v| v * v).sum();
    let ey: f64 = y.left.iter().map(|v| v * v).sum();
    assert!(ey.sqrt() <= peak * ex.sqrt() * (1.0 + 1e-6), "{} > {}", ey.sqrt(), peak * ex.sqrt());
}

#[test]
fn interpolated_sweep_hits_the_grid() {
    let n = 128;
    let ds = synth::horizontal_circle(n, FS, 10.0).unwrap();
    let cs = CoordinateSystem::VerticalPolar;
    let cl = select_plane(&ds, Plane::Horizontal, Ear::Left).unwrap();
    let cr = select_plane(&ds, Plane::Horizontal, Ear::Right).unwrap();
    let resolver = FbsResolver::from_evaluators(
        Plane::Horizontal,
        cs,
        fbs::angular_series(&cl.records, &cl.thetas, 5).unwrap(),
        fbs::angular_series(&cr.records, &cr.thetas, 5).unwrap(),
    );
    for (rec_l, rec_r) in cl.records.iter().zip(&cr.records) {
        let (l, r) = resolver.resolve(rec_l.direction).unwrap();
        assert!(max_err(&l, rec_l.samples()) < 1e-9);
        assert!(max_err(&r, rec_r.samples()) < 1e-9);
    }
    assert!(resolver.resolve(Direction::new(0.0, 40.0)).is_none());

    let len = 2 * 44100;
    let x = synth::noise(&mut synth::rng(9), len, 0.1);
    let traj = Trajectory::azimuth_sweep(len, Direction::new(0.0, 0.0), 1.0, 360).unwrap();
    let y = render(&x, FS, &traj, &resolver, &RenderConfig { block_size: 4096, xfade: 64 }).unwrap();
    assert_eq!(y.left.len(), len + n - 1);
    assert!(y.left.iter().chain(&y.right).all(|v| v.is_finite()));
    // Left ear is louder on the left, right ear on the right.
    let quarter = |v: &[f64], q: usize| v[q * len / 4..(q + 1) * len / 4].iter().map(|s| s * s).sum::<f64>();
    assert!(quarter(&y.left, 0) > quarter(&y.right, 0));
    assert!(quarter(&y.right, 3) > quarter(&y.left, 3));
}

#[test]
fn render_errors() {
    let mut bank = FilterBank::new(48000.0);
    bank.insert(Direction::default(), vec![1.0], vec![1.0]);
    let x = vec![0.0; 100];
    let t = Trajectory::fixed(Direction::default());
    let e = render(&x, FS, &t, &bank, &RenderConfig::default()).unwrap_err();
    assert!(matches!(e, RenderError::SampleRateMismatch { .. }));
    assert!(e.to_string().starts_with("SampleRateMismatch"));

    let t = Trajectory::fixed(Direction::new(90.0, 0.0));
    let e = render(&x, 48000.0, &t, &bank, &RenderConfig::default()).unwrap_err();
    assert!(e.to_string().starts_with("UnresolvableDirection"));
    let near = bank.clone().with_tolerance(100.0);
    assert!(render(&x, 48000.0, &t, &near, &RenderConfig::default()).is_ok());

    let bad = Trajectory::new(vec![TrajectoryPoint { start_sample: 5, direction: Direction::default() }]);
    assert!(matches!(bad, Err(RenderError::InvalidTrajectory(_))));
    let bad = Trajectory::new(vec![
        TrajectoryPoint { start_sample: 0, direction: Direction::default() },
        TrajectoryPoint { start_sample: 0, direction: Direction::default() },
    ]);
    assert!(matches!(bad, Err(RenderError::InvalidTrajectory(_))));
    let cfg = RenderConfig { block_size: 0, xfade: 0 };
    assert!(matches!(
        render(&x, 48000.0, &Trajectory::fixed(Direction::default()), &bank, &cfg),
        Err(RenderError::InvalidConfig(_))
    ));
}

#[test]
fn trajectory_table_round_trip() {
    let t = Trajectory::azimuth_sweep(1000, Direction::new(-20.0, 10.0), 2.5, 8).unwrap();
    let csv = t.to_table().to_csv_string();
    let back = Trajectory::from_table(&hrtf_core::io::Table::read_from(csv.as_bytes()).unwrap()).unwrap();
    assert_eq!(back.points(), t.points());
}
