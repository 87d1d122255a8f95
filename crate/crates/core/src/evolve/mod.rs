//! Time propagation: Strang split steps, exact free flow, energy bookkeeping.

mod free_flow;
mod ledger;
mod observe;
mod propagator;
mod system;

pub use free_flow::free_flow;
pub use ledger::{energy_ledger_update, h1_norm, EnergyLedger, EnergyRow};
pub use observe::{evolve_with_observers, Observer};
pub use propagator::PropagatorState;
pub use system::{System, SystemKind};
