//! Dormand–Prince 8(5,3) reference path. Shares only the vector field and
//! the time-reflection map with the Taylor integrator.

use std::cell::RefCell;
use std::rc::Rc;

use ode_solvers::dop_shared::IntegrationError;
use ode_solvers::{Dop853, OutputType, SVector, System};

use super::{IntegratorConfig, OdeState};
use crate::dynamics::Parameters;
use crate::error::{Error, Result};

struct Field<S> {
    params: Parameters,
    floor: f64,
    failure: Rc<RefCell<Option<Error>>>,
    _marker: std::marker::PhantomData<S>,
}

impl<S: OdeState, const N: usize> System<f64, SVector<f64, N>> for Field<S> {
    fn system(&self, t: f64, y: &SVector<f64, N>, dy: &mut SVector<f64, N>) {
        let state = S::from_values(t, y.as_slice());
        match state.rhs(self.params, self.floor) {
            Ok(d) => dy.copy_from_slice(&d),
            Err(e) => {
                dy.fill(f64::NAN);
                self.failure.borrow_mut().get_or_insert(e);
            }
        }
    }

    fn solout(&mut self, _t: f64, _y: &SVector<f64, N>, _dy: &SVector<f64, N>) -> bool {
        self.failure.borrow().is_some()
    }
}

fn run<S: OdeState, const N: usize>(
    s0: &S,
    p: Parameters,
    t_end: f64,
    cfg: &IntegratorConfig,
) -> Result<S> {
    let reflected = t_end < s0.time();
    let y0 = if reflected { s0.reflected() } else { *s0 };
    let target = if reflected { -t_end } else { t_end };
    if y0.time() == target {
        return Ok(*s0);
    }
    let failure = Rc::new(RefCell::new(None));
    let field = Field::<S> {
        params: p,
        floor: cfg.collision_floor,
        failure: Rc::clone(&failure),
        _marker: std::marker::PhantomData,
    };
    let mut solver = Dop853::from_param(
        field,
        y0.time(),
        target,
        0.0,
        SVector::<f64, N>::from_column_slice(y0.values()),
        cfg.rel_tol,
        cfg.abs_tol,
        0.9,
        0.0,
        0.333,
        6.0,
        cfg.max_step,
        0.0,
        1_000_000,
        1000,
        OutputType::Sparse,
    );
    let outcome = solver.integrate();
    if let Some(e) = failure.borrow_mut().take() {
        return Err(e);
    }
    match outcome {
        Ok(_) => {}
        Err(IntegrationError::StepSizeUnderflow { x }) => {
            return Err(Error::StepSizeUnderflow {
                t: x,
                step: 0.0,
                min_step: cfg.min_step,
            })
        }
        Err(e) => return Err(Error::InvalidInput(format!("reference integrator: {e}"))),
    }
    let (ts, ys) = (solver.x_out(), solver.y_out());
    let (t_last, y_last) = match (ts.last(), ys.last()) {
        (Some(t), Some(y)) => (*t, y),
        _ => return Err(Error::InvalidInput("reference integrator produced no output".into())),
    };
    if (t_last - target).abs() > 1e-9 * target.abs().max(1.0) {
        return Err(Error::InvalidInput(format!(
            "reference integrator stopped at {t_last} before {target}"
        )));
    }
    let y = S::from_values(target, y_last.as_slice());
    Ok(if reflected { y.reflected() } else { y })
}

/// Integrates with an adaptive embedded 8th-order Runge–Kutta method.
pub fn reference_integrate<S: OdeState>(
    s0: &S,
    p: Parameters,
    t_end: f64,
    cfg: &IntegratorConfig,
) -> Result<S> {
    match S::DIM {
        5 => run::<S, 5>(s0, p, t_end, cfg),
        15 => run::<S, 15>(s0, p, t_end, cfg),
        d => Err(Error::InvalidInput(format!("unsupported dimension {d}"))),
    }
}
