use crate::error::{Error, Result};
use crate::evolve::propagator::PropagatorState;

/// A read-only hook called at scheduled times.
pub trait Observer {
    type Record;
    fn observe(&mut self, ps: &PropagatorState) -> Result<Self::Record>;
}

impl<R, F: FnMut(&PropagatorState) -> Result<R>> Observer for F {
    type Record = R;
    fn observe(&mut self, ps: &PropagatorState) -> Result<R> {
        self(ps)
    }
}

/// Advances through `schedule` (then to `t_end`), recording one observation per
/// scheduled time. Times at or before the start are observed immediately.
pub fn evolve_with_observers<O: Observer>(
    ps: &mut PropagatorState,
    t_end: f64,
    schedule: &[f64],
    observer: &mut O,
) -> Result<Vec<O::Record>> {
    if schedule.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidArgument("observation schedule must be strictly increasing".into()));
    }
    let forward = t_end >= ps.t();
    let mut out = Vec::with_capacity(schedule.len());
    for &t in schedule {
        if forward && t > ps.t() || !forward && t < ps.t() {
            ps.advance_to(t);
        }
        out.push(observer.observe(ps)?);
    }
    ps.advance_to(t_end);
    Ok(out)
}
