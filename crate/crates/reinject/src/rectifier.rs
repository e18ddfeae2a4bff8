//! Three-phase diode-bridge load variant.
//!
//! Six ideal diodes rectify the three line currents into a DC bus loaded by
//! the parallel RC branch. Diodes are modeled as ideal on/off switches whose
//! conduction state is re-evaluated once per time step, at the sample
//! boundary: a conducting diode turns off when its current has crossed zero,
//! and an idle diode turns on when its terminal voltage exceeds the bus it
//! connects to. No sub-step event location is attempted, so switching
//! instants are quantized to the sample grid.
//!
//! While the conduction set is fixed the circuit is linear; the negative-bus
//! potential is eliminated through the constraint that the conducting line
//! currents sum to zero, and the remaining states (conducting currents plus
//! the DC capacitor voltage) advance by the same trapezoidal rule as the
//! linear load path.

/// Conduction state of one phase leg: +1 top diode, -1 bottom diode, 0 idle.
type Leg = i8;

/// Result of a rectifier-load run, one sample per time point.
pub struct RectifierRun {
    /// Line current per phase.
    pub i: [Vec<f64>; 3],
    /// Bridge AC terminal voltage per phase (the load-side voltage).
    pub v_term: [Vec<f64>; 3],
    /// DC bus voltage across the RC load.
    pub v_rect: Vec<f64>,
    /// Line-current derivative per phase, from the active loop equation.
    pub didt: [Vec<f64>; 3],
}

pub struct RectifierSim {
    r_tot: f64,
    l_tot: f64,
    r_load: f64,
    c_load: f64,
    dt: f64,
}

impl RectifierSim {
    pub fn new(r_tot: f64, l_tot: f64, r_load: f64, c_load: f64, dt: f64) -> Self {
        assert!(l_tot > 0.0 && c_load > 0.0 && r_load > 0.0 && dt > 0.0 && r_tot >= 0.0);
        RectifierSim {
            r_tot,
            l_tot,
            r_load,
            c_load,
            dt,
        }
    }

    /// Simulate against the per-phase source voltages `u` (grid EMF plus
    /// injected EMF), all phases sampled on the same grid.
    pub fn run(&self, u: &[Vec<f64>; 3]) -> RectifierRun {
        let n = u[0].len();
        assert!(u.iter().all(|c| c.len() == n));
        let mut out = RectifierRun {
            i: [vec![0.0; n], vec![0.0; n], vec![0.0; n]],
            v_term: [vec![0.0; n], vec![0.0; n], vec![0.0; n]],
            v_rect: vec![0.0; n],
            didt: [vec![0.0; n], vec![0.0; n], vec![0.0; n]],
        };
        let mut i = [0.0f64; 3];
        let mut v_c = 0.0f64;
        let mut legs: [Leg; 3] = [0; 3];

        for k in 0..n {
            let u_now = [u[0][k], u[1][k], u[2][k]];
            update_conduction(&mut legs, &mut i, v_c, u_now);

            // record the sample under the freshly settled topology
            let active: Vec<usize> = (0..3).filter(|&p| legs[p] != 0).collect();
            let npos = legs.iter().filter(|&&s| s > 0).count() as f64;
            let v_x = if active.is_empty() {
                0.0
            } else {
                let sum_u: f64 = active.iter().map(|&p| u_now[p]).sum();
                (sum_u - npos * v_c) / active.len() as f64
            };
            for p in 0..3 {
                out.i[p][k] = i[p];
                if legs[p] == 0 {
                    out.v_term[p][k] = u_now[p];
                    out.didt[p][k] = 0.0;
                } else {
                    let bus = v_x + if legs[p] > 0 { v_c } else { 0.0 };
                    out.v_term[p][k] = bus;
                    out.didt[p][k] = (u_now[p] - self.r_tot * i[p] - bus) / self.l_tot;
                }
            }
            out.v_rect[k] = v_c;

            if k + 1 < n {
                let u_next = [u[0][k + 1], u[1][k + 1], u[2][k + 1]];
                self.advance(&legs, &mut i, &mut v_c, u_now, u_next);
            }
        }
        out
    }

    /// One trapezoidal step with a fixed conduction set.
    fn advance(
        &self,
        legs: &[Leg; 3],
        i: &mut [f64; 3],
        v_c: &mut f64,
        u_now: [f64; 3],
        u_next: [f64; 3],
    ) {
        let active: Vec<usize> = (0..3).filter(|&p| legs[p] != 0).collect();
        let b = self.dt / (2.0 * self.c_load);
        if active.len() < 2 {
            // bridge blocked: the DC capacitor discharges into the resistor
            *v_c = (1.0 - b / self.r_load) / (1.0 + b / self.r_load) * *v_c;
            return;
        }

        let na = active.len();
        let npos = active.iter().filter(|&&p| legs[p] > 0).count() as f64;
        let mean_now: f64 = active.iter().map(|&p| u_now[p]).sum::<f64>() / na as f64;
        let mean_next: f64 = active.iter().map(|&p| u_next[p]).sum::<f64>() / na as f64;
        let a = self.dt / (2.0 * self.l_tot);

        // unknowns: conducting currents, then the capacitor voltage
        let m = na + 1;
        let mut mat = [[0.0f64; 4]; 4];
        let mut rhs = [0.0f64; 4];
        for (r, &p) in active.iter().enumerate() {
            let delta = if legs[p] > 0 { 1.0 } else { 0.0 };
            let d = delta - npos / na as f64;
            mat[r][r] = 1.0 + a * self.r_tot;
            mat[r][na] = a * d;
            rhs[r] = (1.0 - a * self.r_tot) * i[p] - a * d * *v_c
                + a * ((u_now[p] - mean_now) + (u_next[p] - mean_next));
        }
        for (col, &p) in active.iter().enumerate() {
            if legs[p] > 0 {
                mat[na][col] = -b;
                rhs[na] += b * i[p];
            }
        }
        mat[na][na] = 1.0 + b / self.r_load;
        rhs[na] += (1.0 - b / self.r_load) * *v_c;

        let x = solve(&mut mat, &mut rhs, m);
        for (r, &p) in active.iter().enumerate() {
            i[p] = x[r];
        }
        *v_c = x[na];
    }
}

/// Settle the conduction set at a sample boundary.
fn update_conduction(legs: &mut [Leg; 3], i: &mut [f64; 3], v_c: f64, u: [f64; 3]) {
    // 1. turn off any diode whose current has reversed
    for p in 0..3 {
        if legs[p] != 0 && (legs[p] as f64) * i[p] < 0.0 {
            legs[p] = 0;
            i[p] = 0.0;
        }
    }
    enforce_closed_loop(legs, i);

    // 2. turn on idle diodes that have become forward biased
    let active: Vec<usize> = (0..3).filter(|&p| legs[p] != 0).collect();
    if active.is_empty() {
        // whole bridge blocked: the most positive / most negative pair can
        // only start conducting once its line-to-line EMF beats the bus
        let mut hi = 0;
        let mut lo = 0;
        for p in 1..3 {
            if u[p] > u[hi] {
                hi = p;
            }
            if u[p] < u[lo] {
                lo = p;
            }
        }
        if hi != lo && u[hi] - u[lo] > v_c {
            legs[hi] = 1;
            legs[lo] = -1;
        }
    } else {
        let npos = legs.iter().filter(|&&s| s > 0).count() as f64;
        let sum_u: f64 = active.iter().map(|&p| u[p]).sum();
        let v_neg = (sum_u - npos * v_c) / active.len() as f64;
        let v_pos = v_neg + v_c;
        for p in 0..3 {
            if legs[p] == 0 {
                if u[p] > v_pos {
                    legs[p] = 1;
                } else if u[p] < v_neg {
                    legs[p] = -1;
                }
            }
        }
    }
    enforce_closed_loop(legs, i);

    // 3. conducting currents must sum to zero; spread any residual left by
    //    the zero clamps above across the conducting phases
    let active: Vec<usize> = (0..3).filter(|&p| legs[p] != 0).collect();
    if active.len() >= 2 {
        let residual: f64 = active.iter().map(|&p| i[p]).sum();
        let share = residual / active.len() as f64;
        for &p in &active {
            i[p] -= share;
        }
    }
}

/// A single conducting phase cannot close a loop through the bridge.
fn enforce_closed_loop(legs: &mut [Leg; 3], i: &mut [f64; 3]) {
    let active: Vec<usize> = (0..3).filter(|&p| legs[p] != 0).collect();
    if active.len() == 1 {
        legs[active[0]] = 0;
        i[active[0]] = 0.0;
    }
}

/// Gaussian elimination with partial pivoting for the tiny (≤ 4x4) step
/// system. The matrix is diagonally dominant for physical parameters, so
/// the pivot can never vanish.
fn solve(mat: &mut [[f64; 4]; 4], rhs: &mut [f64; 4], m: usize) -> [f64; 4] {
    for col in 0..m {
        let mut pivot = col;
        for row in col + 1..m {
            if mat[row][col].abs() > mat[pivot][col].abs() {
                pivot = row;
            }
        }
        if pivot != col {
            mat.swap(col, pivot);
            rhs.swap(col, pivot);
        }
        let diag = mat[col][col];
        debug_assert!(diag.abs() > 0.0, "singular step system");
        for row in col + 1..m {
            let f = mat[row][col] / diag;
            if f != 0.0 {
                for c in col..m {
                    mat[row][c] -= f * mat[col][c];
                }
                rhs[row] -= f * rhs[col];
            }
        }
    }
    let mut x = [0.0f64; 4];
    for row in (0..m).rev() {
        let mut acc = rhs[row];
        for c in row + 1..m {
            acc -= mat[row][c] * x[c];
        }
        x[row] = acc / mat[row][row];
    }
    x
}
