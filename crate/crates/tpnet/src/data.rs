//! Dataset ingestion, fixed-window scene extraction, displacement
//! coordinates, leave-one-out split plans, and synthetic scenario
//! generation.
//!
//! The text format is one observation per line, `frame ped_id x y`,
//! whitespace separated, frames on a uniform grid (0.4 s per step for the
//! public benchmark releases).

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::point::Point;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Observation {
    pub frame: i64,
    pub ped_id: i64,
    pub pos: Point,
}

/// All co-present pedestrians over one full observation + prediction
/// window. Every trajectory covers exactly `t_obs + t_pred` steps.
#[derive(Clone, Debug, PartialEq)]
pub struct Scene {
    pub start_frame: i64,
    /// Frames advanced per time step.
    pub frame_step: i64,
    pub t_obs: usize,
    pub t_pred: usize,
    pub ped_ids: Vec<i64>,
    pub trajectories: Vec<Vec<Point>>,
}

impl Scene {
    pub fn num_peds(&self) -> usize {
        self.ped_ids.len()
    }

    pub fn window_len(&self) -> usize {
        self.t_obs + self.t_pred
    }

    pub fn observed(&self, i: usize) -> &[Point] {
        &self.trajectories[i][..self.t_obs]
    }

    pub fn future(&self, i: usize) -> &[Point] {
        &self.trajectories[i][self.t_obs..]
    }

    /// Ground-truth futures for every pedestrian.
    pub fn futures(&self) -> Vec<Vec<Point>> {
        (0..self.num_peds()).map(|i| self.future(i).to_vec()).collect()
    }

    /// Returns a copy with every position shifted by `offset`.
    pub fn translated(&self, offset: Point) -> Scene {
        let mut out = self.clone();
        for traj in &mut out.trajectories {
            for p in traj.iter_mut() {
                *p += offset;
            }
        }
        out
    }

    fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.ped_ids.is_empty() {
            out.push("scene has no pedestrians".into());
        }
        if self.ped_ids.len() != self.trajectories.len() {
            out.push("ped_ids and trajectories differ in length".into());
        }
        let mut seen = std::collections::BTreeSet::new();
        for id in &self.ped_ids {
            if !seen.insert(*id) {
                out.push(format!("duplicate ped_id {id}"));
            }
        }
        for (i, t) in self.trajectories.iter().enumerate() {
            if t.len() != self.window_len() {
                out.push(format!(
                    "trajectory {i} has {} steps, window needs {}",
                    t.len(),
                    self.window_len()
                ));
            }
            if t.iter().any(|p| !p.is_finite()) {
                out.push(format!("trajectory {i} has non-finite coordinates"));
            }
        }
        out
    }
}

/// Checks the full-window invariant over a scene list; returns one message
/// per violation (empty means all scenes are well formed).
pub fn validate_scenes(scenes: &[Scene]) -> Vec<String> {
    scenes
        .iter()
        .enumerate()
        .flat_map(|(i, s)| {
            s.violations()
                .into_iter()
                .map(move |v| format!("scene {i}: {v}"))
        })
        .collect()
}

/// The five benchmark scene names used by the leave-one-out protocol.
pub const DATASET_NAMES: [&str; 5] = ["ETH", "HOTEL", "UNIV", "ZARA1", "ZARA2"];

/// One leave-one-out fold: four training sets, one held-out test set.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SplitPlan {
    pub train_sets: Vec<String>,
    pub test_set: String,
}

impl SplitPlan {
    /// Builds the fold that holds out `test_set`.
    pub fn leave_one_out(test_set: &str) -> Result<SplitPlan> {
        let canon = DATASET_NAMES
            .iter()
            .find(|n| n.eq_ignore_ascii_case(test_set))
            .ok_or_else(|| Error::ConfigError(format!("unknown dataset '{test_set}'")))?;
        Ok(SplitPlan {
            train_sets: DATASET_NAMES
                .iter()
                .filter(|n| *n != canon)
                .map(|n| n.to_string())
                .collect(),
            test_set: canon.to_string(),
        })
    }

    /// All five folds.
    pub fn all_folds() -> Vec<SplitPlan> {
        DATASET_NAMES
            .iter()
            .map(|n| SplitPlan::leave_one_out(n).unwrap())
            .collect()
    }
}

/// Parses the `frame ped_id x y` text format. Observations come back sorted
/// by (frame, ped_id); duplicate keys are rejected.
pub fn parse_dataset_file(text: &str) -> Result<Vec<Observation>> {
    let mut out = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let line_no = idx + 1;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        let fields: Vec<&str> = trimmed.split_whitespace().collect();
        if fields.len() != 4 {
            return Err(Error::ParseError {
                line: line_no,
                msg: format!("expected 4 fields, got {}", fields.len()),
            });
        }
        let parse_num = |s: &str, what: &str| -> Result<f64> {
            s.parse::<f64>().map_err(|_| Error::ParseError {
                line: line_no,
                msg: format!("{what} '{s}' is not numeric"),
            })
        };
        let frame_f = parse_num(fields[0], "frame")?;
        let ped_f = parse_num(fields[1], "ped_id")?;
        if frame_f.fract() != 0.0 || ped_f.fract() != 0.0 {
            return Err(Error::ParseError {
                line: line_no,
                msg: "frame and ped_id must be integers".into(),
            });
        }
        let x = parse_num(fields[2], "x")?;
        let y = parse_num(fields[3], "y")?;
        if !x.is_finite() || !y.is_finite() {
            return Err(Error::ParseError {
                line: line_no,
                msg: "coordinates must be finite".into(),
            });
        }
        out.push(Observation {
            frame: frame_f as i64,
            ped_id: ped_f as i64,
            pos: Point::new(x, y),
        });
    }
    out.sort_by_key(|o| (o.frame, o.ped_id));
    for w in out.windows(2) {
        if w[0].frame == w[1].frame && w[0].ped_id == w[1].ped_id {
            return Err(Error::DuplicateObservation {
                frame: w[0].frame,
                ped_id: w[0].ped_id,
            });
        }
    }
    Ok(out)
}

/// Serializes observations back into the text format.
pub fn serialize_observations(obs: &[Observation]) -> String {
    let mut s = String::new();
    for o in obs {
        let _ = writeln!(s, "{} {} {} {}", o.frame, o.ped_id, o.pos.x, o.pos.y);
    }
    s
}

/// Flattens scenes into observations on disjoint, consistent frame grids so
/// the file parses back into the same windows.
pub fn scenes_to_observations(scenes: &[Scene]) -> Vec<Observation> {
    let mut out = Vec::new();
    for scene in scenes {
        for (ped, traj) in scene.ped_ids.iter().zip(&scene.trajectories) {
            for (step, pos) in traj.iter().enumerate() {
                out.push(Observation {
                    frame: scene.start_frame + step as i64 * scene.frame_step,
                    ped_id: *ped,
                    pos: *pos,
                });
            }
        }
    }
    out.sort_by_key(|o| (o.frame, o.ped_id));
    out
}

/// Slides a `t_obs + t_pred` window over the frame grid with the given
/// stride (in time steps). The grid step is the modal difference between
/// consecutive distinct frames, which keeps stray off-grid samples from
/// shifting everyone else's windows. A pedestrian joins a scene iff it is
/// observed at every one of the window's frames and at no off-grid frame
/// inside the window span; windows where no pedestrian qualifies are
/// dropped.
pub fn extract_scenes(
    obs: &[Observation],
    t_obs: usize,
    t_pred: usize,
    stride: usize,
) -> Result<Vec<Scene>> {
    if stride == 0 {
        return Err(Error::InvalidLength("stride must be >= 1".into()));
    }
    let window = t_obs + t_pred;
    let mut frames: Vec<i64> = obs.iter().map(|o| o.frame).collect();
    frames.sort_unstable();
    frames.dedup();
    if frames.len() < window {
        return Ok(Vec::new());
    }

    let Some(step) = modal_frame_step(&frames) else {
        return Ok(Vec::new());
    };

    // (ped -> frame -> pos), ordered for deterministic scene membership.
    let mut by_ped: BTreeMap<i64, BTreeMap<i64, Point>> = BTreeMap::new();
    for o in obs {
        by_ped.entry(o.ped_id).or_default().insert(o.frame, o.pos);
    }

    let mut scenes = Vec::new();
    let mut anchor_idx = 0usize;
    while anchor_idx < frames.len() {
        let lo = frames[anchor_idx];
        let hi = lo + (window as i64 - 1) * step;
        let mut ped_ids = Vec::new();
        let mut trajectories = Vec::new();
        for (ped, samples) in &by_ped {
            let mut count = 0usize;
            let mut on_grid = true;
            for (&f, _) in samples.range(lo..=hi) {
                if (f - lo) % step != 0 {
                    on_grid = false;
                    break;
                }
                count += 1;
            }
            if !on_grid || count != window {
                continue;
            }
            ped_ids.push(*ped);
            trajectories.push(samples.range(lo..=hi).map(|(_, &p)| p).collect());
        }
        if !ped_ids.is_empty() {
            scenes.push(Scene {
                start_frame: lo,
                frame_step: step,
                t_obs,
                t_pred,
                ped_ids,
                trajectories,
            });
        }
        anchor_idx += stride;
    }
    Ok(scenes)
}

/// Most common positive difference between consecutive distinct frames;
/// ties resolve to the smaller step.
fn modal_frame_step(frames: &[i64]) -> Option<i64> {
    let mut counts: BTreeMap<i64, usize> = BTreeMap::new();
    for w in frames.windows(2) {
        let d = w[1] - w[0];
        if d > 0 {
            *counts.entry(d).or_default() += 1;
        }
    }
    counts
        .into_iter()
        .max_by(|a, b| a.1.cmp(&b.1).then(b.0.cmp(&a.0)))
        .map(|(d, _)| d)
}

/// The most recent complete `t_obs`-step window in a stream of
/// observations, for prediction without ground-truth futures.
#[derive(Clone, Debug, PartialEq)]
pub struct ObservationWindow {
    pub start_frame: i64,
    pub frame_step: i64,
    pub ped_ids: Vec<i64>,
    pub observed: Vec<Vec<Point>>,
}

/// Finds the latest `t_obs` consecutive grid frames and the pedestrians
/// fully observed across them. Returns `None` when no pedestrian has a
/// complete window.
pub fn latest_observation_window(obs: &[Observation], t_obs: usize) -> Option<ObservationWindow> {
    let mut frames: Vec<i64> = obs.iter().map(|o| o.frame).collect();
    frames.sort_unstable();
    frames.dedup();
    if frames.len() < t_obs {
        return None;
    }
    let step = modal_frame_step(&frames)?;
    let hi = *frames.last().unwrap();
    let lo = hi - (t_obs as i64 - 1) * step;

    let mut by_ped: BTreeMap<i64, BTreeMap<i64, Point>> = BTreeMap::new();
    for o in obs {
        by_ped.entry(o.ped_id).or_default().insert(o.frame, o.pos);
    }
    let mut ped_ids = Vec::new();
    let mut observed = Vec::new();
    for (ped, samples) in &by_ped {
        let mut count = 0usize;
        let mut on_grid = true;
        for (&f, _) in samples.range(lo..=hi) {
            if (f - lo) % step != 0 {
                on_grid = false;
                break;
            }
            count += 1;
        }
        if on_grid && count == t_obs {
            ped_ids.push(*ped);
            observed.push(samples.range(lo..=hi).map(|(_, &p)| p).collect());
        }
    }
    if ped_ids.is_empty() {
        return None;
    }
    Some(ObservationWindow {
        start_frame: lo,
        frame_step: step,
        ped_ids,
        observed,
    })
}

/// Consecutive differences prefixed by a zero displacement; same length as
/// the input.
pub fn to_displacements(traj: &[Point]) -> Result<Vec<Point>> {
    if traj.is_empty() {
        return Err(Error::EmptySequence);
    }
    let mut out = Vec::with_capacity(traj.len());
    out.push(Point::ZERO);
    for w in traj.windows(2) {
        out.push(w[1] - w[0]);
    }
    Ok(out)
}

/// Inverse of [`to_displacements`]: cumulative sums from `start`. The
/// leading zero displacement reproduces `start` as the first position.
pub fn from_displacements(start: Point, disp: &[Point]) -> Result<Vec<Point>> {
    if disp.is_empty() {
        return Err(Error::EmptySequence);
    }
    let mut out = Vec::with_capacity(disp.len());
    let mut pos = start;
    for (i, d) in disp.iter().enumerate() {
        if i == 0 {
            pos = start + *d;
        } else {
            pos += *d;
        }
        out.push(pos);
    }
    Ok(out)
}

/// Synthetic scene families for desk-scale testing.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Scenario {
    ConstantVelocity,
    Sinusoidal,
    ParallelPair,
    OpposingPair,
}

impl Scenario {
    pub fn parse(name: &str) -> Result<Scenario> {
        match name {
            "constant_velocity" => Ok(Scenario::ConstantVelocity),
            "sinusoidal" => Ok(Scenario::Sinusoidal),
            "parallel_pair" => Ok(Scenario::ParallelPair),
            "opposing_pair" => Ok(Scenario::OpposingPair),
            other => Err(Error::ConfigError(format!("unknown scenario '{other}'"))),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Scenario::ConstantVelocity => "constant_velocity",
            Scenario::Sinusoidal => "sinusoidal",
            Scenario::ParallelPair => "parallel_pair",
            Scenario::OpposingPair => "opposing_pair",
        }
    }
}

/// Generates `count` scenes of the named scenario, deterministic per seed.
/// Scenes are laid out on disjoint frame ranges with globally unique
/// pedestrian ids so they can be written to disk and re-extracted.
pub fn gen_synthetic(
    scenario: Scenario,
    count: usize,
    seed: u64,
    t_obs: usize,
    t_pred: usize,
) -> Vec<Scene> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let window = t_obs + t_pred;
    let mut scenes = Vec::with_capacity(count);
    for idx in 0..count {
        let start_frame = (idx * (window + 4)) as i64 * 10;
        let mut ped_ids = Vec::new();
        let mut trajectories = Vec::new();
        let base_id = (idx * 8) as i64;
        match scenario {
            Scenario::ConstantVelocity => {
                let p0 = random_origin(&mut rng);
                let v = random_velocity(&mut rng);
                ped_ids.push(base_id + 1);
                trajectories.push(line_traj(p0, v, window));
            }
            Scenario::Sinusoidal => {
                let p0 = random_origin(&mut rng);
                let v = rng.random_range(0.3..1.2);
                let amp = rng.random_range(0.2..1.5);
                let omega = rng.random_range(0.2..0.8);
                let phase = rng.random_range(0.0..std::f64::consts::TAU);
                ped_ids.push(base_id + 1);
                trajectories.push(
                    (0..window)
                        .map(|t| {
                            let tf = t as f64;
                            Point::new(p0.x + v * tf, p0.y + amp * (omega * tf + phase).sin())
                        })
                        .collect(),
                );
            }
            Scenario::ParallelPair => {
                let p0 = random_origin(&mut rng);
                let v = random_velocity(&mut rng);
                let gap = Point::new(-v.y, v.x) * (rng.random_range(0.8..1.6) / v.norm().max(1e-9));
                ped_ids.extend([base_id + 1, base_id + 2]);
                trajectories.push(line_traj(p0, v, window));
                trajectories.push(line_traj(p0 + gap, v, window));
            }
            Scenario::OpposingPair => {
                // A walks P -> Q, B walks Q -> P along the same line; the
                // start of each is exactly the end of the other.
                let p = random_origin(&mut rng);
                let span = random_velocity(&mut rng) * ((window - 1) as f64);
                let q = p + span;
                let v = span * (1.0 / (window - 1) as f64);
                ped_ids.extend([base_id + 1, base_id + 2]);
                trajectories.push(line_traj(p, v, window));
                trajectories.push(line_traj(q, v * -1.0, window));
            }
        }
        scenes.push(Scene {
            start_frame,
            frame_step: 10,
            t_obs,
            t_pred,
            ped_ids,
            trajectories,
        });
    }
    scenes
}

fn random_origin(rng: &mut ChaCha8Rng) -> Point {
    Point::new(rng.random_range(-10.0..10.0), rng.random_range(-10.0..10.0))
}

fn random_velocity(rng: &mut ChaCha8Rng) -> Point {
    let speed = rng.random_range(0.3..1.5);
    let angle = rng.random_range(0.0..std::f64::consts::TAU);
    Point::new(speed * angle.cos(), speed * angle.sin())
}

fn line_traj(p0: Point, v: Point, steps: usize) -> Vec<Point> {
    (0..steps).map(|t| p0 + v * t as f64).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_a_simple_line() {
        let obs = parse_dataset_file("10 3 4.5 -2.0\n").unwrap();
        assert_eq!(
            obs,
            vec![Observation {
                frame: 10,
                ped_id: 3,
                pos: Point::new(4.5, -2.0)
            }]
        );
    }

    #[test]
    fn empty_file_parses_to_nothing() {
        assert!(parse_dataset_file("").unwrap().is_empty());
        assert!(parse_dataset_file("\n  \n").unwrap().is_empty());
    }

    #[test]
    fn short_line_reports_its_line_number() {
        match parse_dataset_file("10 3 4.5") {
            Err(Error::ParseError { line, .. }) => assert_eq!(line, 1),
            other => panic!("expected ParseError, got {other:?}"),
        }
        match parse_dataset_file("1 1 0 0\nbogus line here also4\n") {
            Err(Error::ParseError { line, .. }) => assert_eq!(line, 2),
            other => panic!("expected ParseError, got {other:?}"),
        }
    }

    #[test]
    fn duplicate_keys_are_rejected() {
        let text = "10 3 1.0 1.0\n10 3 2.0 2.0\n";
        assert!(matches!(
            parse_dataset_file(text),
            Err(Error::DuplicateObservation { frame: 10, ped_id: 3 })
        ));
    }

    #[test]
    fn parse_serialize_roundtrip() {
        let text = "0 1 0.5 -0.25\n10 1 1 0\n10 2 -3.5 4\n20 1 1.5 0.25\n";
        let obs = parse_dataset_file(text).unwrap();
        let back = parse_dataset_file(&serialize_observations(&obs)).unwrap();
        assert_eq!(obs, back);
    }

    fn grid_obs(ped: i64, frames: &[i64]) -> Vec<Observation> {
        frames
            .iter()
            .map(|&f| Observation {
                frame: f,
                ped_id: ped,
                pos: Point::new(f as f64 * 0.1, ped as f64),
            })
            .collect()
    }

    #[test]
    fn exactly_one_full_window_yields_one_scene() {
        let frames: Vec<i64> = (0..20).map(|i| i * 10).collect();
        let obs = grid_obs(1, &frames);
        let scenes = extract_scenes(&obs, 8, 12, 1).unwrap();
        assert_eq!(scenes.len(), 1);
        assert_eq!(scenes[0].num_peds(), 1);
        assert_eq!(scenes[0].trajectories[0].len(), 20);
        assert_eq!(scenes[0].frame_step, 10);
    }

    #[test]
    fn nineteen_steps_yield_no_scene() {
        let frames: Vec<i64> = (0..19).map(|i| i * 10).collect();
        let obs = grid_obs(1, &frames);
        assert!(extract_scenes(&obs, 8, 12, 1).unwrap().is_empty());
    }

    #[test]
    fn three_peds_over_21_steps_give_two_scenes_of_three() {
        let frames: Vec<i64> = (0..21).map(|i| i * 10).collect();
        let mut obs = Vec::new();
        for ped in 1..=3 {
            obs.extend(grid_obs(ped, &frames));
        }
        let scenes = extract_scenes(&obs, 8, 12, 1).unwrap();
        assert_eq!(scenes.len(), 2);
        for s in &scenes {
            assert_eq!(s.num_peds(), 3);
        }
        assert!(validate_scenes(&scenes).is_empty());
    }

    #[test]
    fn off_grid_pedestrian_is_excluded_not_fatal() {
        let frames: Vec<i64> = (0..20).map(|i| i * 10).collect();
        let mut obs = grid_obs(1, &frames);
        // Ped 2 has all 20 grid frames plus one off-grid sample inside the span.
        obs.extend(grid_obs(2, &frames));
        obs.push(Observation {
            frame: 15,
            ped_id: 2,
            pos: Point::new(0.0, 0.0),
        });
        let scenes = extract_scenes(&obs, 8, 12, 1).unwrap();
        assert_eq!(scenes.len(), 1);
        assert_eq!(scenes[0].ped_ids, vec![1]);
    }

    #[test]
    fn displacement_roundtrip_and_examples() {
        let traj = vec![Point::new(0.0, 0.0), Point::new(1.0, 0.0), Point::new(2.0, 0.0)];
        let disp = to_displacements(&traj).unwrap();
        assert_eq!(
            disp,
            vec![Point::ZERO, Point::new(1.0, 0.0), Point::new(1.0, 0.0)]
        );
        assert_eq!(from_displacements(traj[0], &disp).unwrap(), traj);

        let constant = vec![Point::new(2.0, 3.0); 5];
        assert!(to_displacements(&constant)
            .unwrap()
            .iter()
            .all(|d| *d == Point::ZERO));
        assert!(matches!(to_displacements(&[]), Err(Error::EmptySequence)));
    }

    #[test]
    fn displacement_roundtrip_on_random_trajectories() {
        use rand::Rng;
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..50 {
            let traj: Vec<Point> = (0..20)
                .map(|_| Point::new(rng.random_range(-20.0..20.0), rng.random_range(-20.0..20.0)))
                .collect();
            let disp = to_displacements(&traj).unwrap();
            let back = from_displacements(traj[0], &disp).unwrap();
            for (p, q) in traj.iter().zip(&back) {
                assert!(p.dist(q) <= 1e-12);
            }
        }
    }

    #[test]
    fn latest_window_picks_the_trailing_frames() {
        let frames: Vec<i64> = (0..12).map(|i| i * 10).collect();
        let mut obs = grid_obs(1, &frames);
        // Ped 2 only covers the first half; it has no complete last window.
        obs.extend(grid_obs(2, &frames[..6]));
        let w = latest_observation_window(&obs, 8).unwrap();
        assert_eq!(w.start_frame, 40);
        assert_eq!(w.ped_ids, vec![1]);
        assert_eq!(w.observed[0].len(), 8);
        assert!(latest_observation_window(&obs[..3], 8).is_none());
    }

    #[test]
    fn leave_one_out_places_four_in_training() {
        for name in DATASET_NAMES {
            let plan = SplitPlan::leave_one_out(name).unwrap();
            assert_eq!(plan.train_sets.len(), 4);
            assert!(!plan.train_sets.contains(&plan.test_set));
            let mut all = plan.train_sets.clone();
            all.push(plan.test_set.clone());
            all.sort();
            let mut expect: Vec<String> = DATASET_NAMES.iter().map(|s| s.to_string()).collect();
            expect.sort();
            assert_eq!(all, expect);
        }
        assert!(SplitPlan::leave_one_out("NOPE").is_err());
    }

    #[test]
    fn constant_velocity_scenes_are_exactly_linear() {
        let scenes = gen_synthetic(Scenario::ConstantVelocity, 5, 42, 8, 12);
        assert_eq!(scenes.len(), 5);
        for s in &scenes {
            let t = &s.trajectories[0];
            let v = t[1] - t[0];
            for i in 2..t.len() {
                let expect = t[0] + v * i as f64;
                assert!(t[i].dist(&expect) <= 1e-12);
            }
        }
    }

    #[test]
    fn same_seed_reproduces_scenes() {
        let a = gen_synthetic(Scenario::Sinusoidal, 7, 9, 8, 12);
        let b = gen_synthetic(Scenario::Sinusoidal, 7, 9, 8, 12);
        assert_eq!(a, b);
    }

    #[test]
    fn opposing_pair_swaps_endpoints_and_closes_then_opens() {
        let scenes = gen_synthetic(Scenario::OpposingPair, 4, 3, 8, 12);
        for s in &scenes {
            let a = &s.trajectories[0];
            let b = &s.trajectories[1];
            assert!(a[0].dist(b.last().unwrap()) <= 1e-9);
            assert!(b[0].dist(a.last().unwrap()) <= 1e-9);
            let d: Vec<f64> = a.iter().zip(b).map(|(p, q)| p.dist(q)).collect();
            let min_idx = d
                .iter()
                .enumerate()
                .min_by(|x, y| x.1.partial_cmp(y.1).unwrap())
                .unwrap()
                .0;
            assert!(min_idx > 0 && min_idx < d.len() - 1);
            for i in 0..min_idx {
                assert!(d[i + 1] < d[i] + 1e-12);
            }
            for i in min_idx..d.len() - 1 {
                assert!(d[i + 1] > d[i] - 1e-12);
            }
        }
    }

    #[test]
    fn synthetic_scenes_survive_disk_roundtrip() {
        let scenes = gen_synthetic(Scenario::ParallelPair, 3, 11, 8, 12);
        let obs = scenes_to_observations(&scenes);
        let text = serialize_observations(&obs);
        let parsed = parse_dataset_file(&text).unwrap();
        let back = extract_scenes(&parsed, 8, 12, 20).unwrap();
        assert_eq!(back.len(), scenes.len());
        for (orig, rt) in scenes.iter().zip(&back) {
            assert_eq!(orig.ped_ids, rt.ped_ids);
            for (a, b) in orig.trajectories.iter().zip(&rt.trajectories) {
                for (p, q) in a.iter().zip(b) {
                    assert!(p.dist(q) <= 1e-12);
                }
            }
        }
    }
}
