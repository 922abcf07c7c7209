//! Self-contained numerical kernels: special functions, adaptive quadrature,
//! root finding, scalar minimization, and a dense simplex solver.

pub mod lp;
pub mod optim;
pub mod quad;
pub mod roots;
pub mod special;

pub use lp::{solve as solve_lp, LpProblem, LpSolution};
pub use optim::minimize_scalar_convex;
pub use quad::{integrate, integrate_semi_infinite, QuadratureSpec};
pub use roots::{find_root, RootBracket};
pub use special::{erf, erfc, erfcx, marcum_q_3_2};
