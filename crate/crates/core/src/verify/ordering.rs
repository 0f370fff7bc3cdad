use serde::{Deserialize, Serialize};

use crate::state::{FixedDomainState, Trajectory};

/// Default relative band for ordering checks between discrete runs.
pub const ORDERING_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Component {
    Front,
    SupU,
    SupV,
    U,
    V,
}

/// Where the lower run exceeded the upper one.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ViolationSite {
    pub t: f64,
    pub component: Component,
    /// Physical position for field checks, `None` for scalar series.
    pub x: Option<f64>,
    pub lower: f64,
    pub upper: f64,
    /// `lower - upper`
    pub excess: f64,
    /// Allowed excess at this site, `tol * sup`.
    pub band: f64,
}

impl ViolationSite {
    pub fn beyond_band(&self) -> bool {
        self.excess > self.band
    }
}

/// Outcome of checking `lower <= upper` over two trajectories.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrderingReport {
    pub tol: f64,
    pub checked: usize,
    pub matched_times: usize,
    /// Sites where `lower > upper` but inside the tolerance band.
    pub noise: usize,
    pub violations: usize,
    /// Largest `excess - band` seen, the first violation if positive.
    pub worst: Option<ViolationSite>,
    /// Smallest `upper - lower` over all checked sites.
    pub min_margin: f64,
    /// Largest `|upper - lower|` over all checked sites.
    pub max_abs_diff: f64,
}

impl OrderingReport {
    pub fn holds(&self) -> bool {
        self.violations == 0
    }

    fn new(tol: f64) -> Self {
        Self {
            tol,
            checked: 0,
            matched_times: 0,
            noise: 0,
            violations: 0,
            worst: None,
            min_margin: f64::INFINITY,
            max_abs_diff: 0.0,
        }
    }

    fn check(&mut self, t: f64, component: Component, x: Option<f64>, lower: f64, upper: f64, scale: f64) {
        let band = self.tol * scale;
        let site = ViolationSite {
            t,
            component,
            x,
            lower,
            upper,
            excess: lower - upper,
            band,
        };
        self.checked += 1;
        self.min_margin = self.min_margin.min(upper - lower);
        self.max_abs_diff = self.max_abs_diff.max((upper - lower).abs());
        if site.excess > 0.0 {
            if site.beyond_band() {
                self.violations += 1;
            } else {
                self.noise += 1;
            }
            let worse = self
                .worst
                .is_none_or(|w| site.excess - site.band > w.excess - w.band);
            if worse {
                self.worst = Some(site);
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    /// first argument `<=` second
    AtMost,
    /// first argument `>=` second
    AtLeast,
}

/// Checks `a <= b` (or `a >= b`) on already computed trajectories.
///
/// Per-step scalar series are compared wherever the two time axes agree;
/// fields are compared at snapshots with identical times, at every node of
/// either run lying in the lower run's domain, by linear interpolation in `x`.
pub fn check_ordering(a: &Trajectory, b: &Trajectory, tol: f64, direction: Direction) -> OrderingReport {
    match direction {
        Direction::AtMost => compare_lower_upper(a, b, tol),
        Direction::AtLeast => compare_lower_upper(b, a, tol),
    }
}

fn compare_lower_upper(lower: &Trajectory, upper: &Trajectory, tol: f64) -> OrderingReport {
    let mut report = OrderingReport::new(tol);
    let steps = lower.len().min(upper.len());
    for k in 0..steps {
        if lower.times[k] != upper.times[k] {
            continue;
        }
        let t = lower.times[k];
        let scale = lower.sup_u[k]
            .max(lower.sup_v[k])
            .max(upper.sup_u[k])
            .max(upper.sup_v[k]);
        report.check(
            t,
            Component::Front,
            None,
            lower.fronts[k],
            upper.fronts[k],
            lower.fronts[k].max(upper.fronts[k]),
        );
        report.check(t, Component::SupU, None, lower.sup_u[k], upper.sup_u[k], scale);
        report.check(t, Component::SupV, None, lower.sup_v[k], upper.sup_v[k], scale);
    }

    let mut j = 0;
    for low in &lower.snapshots {
        while j < upper.snapshots.len() && upper.snapshots[j].t < low.t {
            j += 1;
        }
        if j == upper.snapshots.len() {
            break;
        }
        let up = &upper.snapshots[j];
        if up.t != low.t {
            continue;
        }
        report.matched_times += 1;
        compare_fields(&mut report, low, up);
    }
    report
}

fn compare_fields(report: &mut OrderingReport, low: &FixedDomainState, up: &FixedDomainState) {
    let scale = low.sup_w().max(low.sup_z()).max(up.sup_w()).max(up.sup_z());
    let sample_upper = |x: f64| if x <= up.s { up.sample_physical(x) } else { (0.0, 0.0) };
    for x in low.x_nodes() {
        let (ul, vl) = low.sample_physical(x);
        let (uu, vu) = sample_upper(x);
        report.check(low.t, Component::U, Some(x), ul, uu, scale);
        report.check(low.t, Component::V, Some(x), vl, vu, scale);
    }
    for x in up.x_nodes().filter(|&x| x <= low.s) {
        let (ul, vl) = low.sample_physical(x);
        let (uu, vu) = up.sample_physical(x);
        report.check(low.t, Component::U, Some(x), ul, uu, scale);
        report.check(low.t, Component::V, Some(x), vl, vu, scale);
    }
}
