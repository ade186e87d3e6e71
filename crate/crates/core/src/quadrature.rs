//! Composite Simpson quadrature, used as the deterministic oracle for
//! normalizing constants and weight second moments.

/// Composite Simpson rule on `[a, b]` with `panels` panels (rounded up to even).
pub fn simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, panels: usize) -> f64 {
    let panels = panels.max(2) + panels % 2;
    let h = (b - a) / panels as f64;
    let mut odd = 0.0;
    let mut even = 0.0;
    for i in 1..panels {
        let x = a + i as f64 * h;
        if i % 2 == 1 {
            odd += f(x);
        } else {
            even += f(x);
        }
    }
    h / 3.0 * (f(a) + f(b) + 4.0 * odd + 2.0 * even)
}

/// Panel count used by the oracle checks.
pub const ORACLE_PANELS: usize = 200_000;
