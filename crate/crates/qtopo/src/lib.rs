//! qtopo — conductor topology optimization for antenna Q-factor
//! minimization in a method-of-moments model.
//!
//! The toolkit assembles EFIE operators over triangulated surfaces with an
//! RWG basis, evaluates the stored-energy Q-factor of a driven design, and
//! minimizes it by gradient-based density topology optimization: density
//! filtering, tanh projection with β-continuation, a RAMP-like resistivity
//! interpolation, adjoint sensitivities and the Method of Moving Asymptotes
//! in the bound (min-max) formulation.
//!
//! Start with the runnable examples, one per capability:
//!
//! ```text
//! cargo run --release --example mesh_generation
//! cargo run --release --example dipole_impedance
//! cargo run --release --example loop_qfactor
//! cargo run --release --example gradient_check
//! cargo run --release --example plate_optimization
//! cargo run --release --example sphere_optimization
//! cargo run --release --example frequency_sweep
//! cargo run --release --example spherical_curves
//! ```
//!
//! A thin `qtopo` binary exposes the same flows as subcommands
//! (`mesh`, `optimize`, `sweep`, `gradcheck`, `curves`).
//!
//! Typical library flow:
//!
//! ```
//! use qtopo::mesh::{build_rwg, generate_plate};
//! use qtopo::operators::{locate_feed_edge, FeedSpec, OperatorSet};
//! use qtopo::quadrature::QuadSpec;
//! use qtopo::vec3::Vec3;
//!
//! let mesh = generate_plate(0.1, 0.6, 3, 2).unwrap();
//! let basis = build_rwg(&mesh).unwrap();
//! let edge = locate_feed_edge(&mesh, &basis, Vec3::new(0.0, 0.03, 0.0),
//!                             Vec3::new(1.0, 0.0, 0.0)).unwrap();
//! let feeds = FeedSpec::single(edge, 1.0);
//! let ops = OperatorSet::assemble(&mesh, &basis, 0.8 / mesh.a,
//!                                 QuadSpec::DEFAULT, &feeds, 1e-3).unwrap();
//! let state = qtopo::qfactor::solve_state(&ops, None).unwrap();
//! assert!(state.q > 0.0);
//! ```

pub mod cli;
pub mod curves;
pub mod filters;
pub mod io;
pub mod linalg;
pub mod material;
pub mod mesh;
pub mod mma;
pub mod operators;
pub mod qfactor;
pub mod quadrature;
pub mod topopt;
pub mod vec3;

/// Chu-type analytic lower bound on Q used as a sanity floor,
/// `1/(ka)³ + 1/(ka)`.
pub fn chu_q_floor(ka: f64) -> f64 {
    1.0 / (ka * ka * ka) + 1.0 / ka
}

#[cfg(test)]
mod tests {
    #[test]
    fn chu_floor_at_published_point() {
        // ka = 0.8 → ≈ 3.20.
        let q = super::chu_q_floor(0.8);
        assert!((q - 3.203125).abs() < 1e-12);
    }
}
