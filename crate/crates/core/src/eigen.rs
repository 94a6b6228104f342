//! Eigenvalues of real symmetric tridiagonal matrices by the implicit-shift
//! QL iteration. The rotating-frame Hamiltonians in this crate are
//! tridiagonal by the m_F <-> m_F ± 1 selection rule, so nothing denser is
//! needed. Eigenvalues only; the potentials never need the vectors.

/// Off-diagonal decay threshold, relative to the neighbouring diagonal pair.
const REL_TOL: f64 = 1e-14;
/// Iteration cap per eigenvalue.
const MAX_SWEEPS: usize = 50;

/// Raised when an eigenvalue fails to converge within the sweep cap.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NonConvergence {
    pub index: usize,
}

/// Eigenvalues of the symmetric tridiagonal matrix with diagonal `diag` and
/// off-diagonal `off` (length `diag.len() - 1`), sorted ascending.
pub fn tridiagonal_eigenvalues(diag: &[f64], off: &[f64]) -> Result<Vec<f64>, NonConvergence> {
    let n = diag.len();
    assert_eq!(off.len(), n.saturating_sub(1), "off-diagonal length mismatch");
    if n == 0 {
        return Ok(Vec::new());
    }
    let mut d = diag.to_vec();
    let mut e = Vec::with_capacity(n);
    e.extend_from_slice(off);
    e.push(0.0);

    for l in 0..n {
        let mut iter = 0usize;
        loop {
            // locate a negligible off-diagonal element
            let mut m = l;
            while m < n - 1 {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= REL_TOL * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > MAX_SWEEPS {
                return Err(NonConvergence { index: l });
            }

            // implicit shift from the leading 2x2
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(if g != 0.0 { g } else { 1.0 }));
            let mut s = 1.0;
            let mut c = 1.0;
            let mut p = 0.0;

            let mut underflow = false;
            for i in (l..m).rev() {
                let mut f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    // recover an isolated eigenvalue and restart
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    underflow = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                f = (d[i] - g) * s + 2.0 * c * b;
                p = s * f;
                d[i + 1] = g + p;
                g = c * f - b;
            }
            if underflow {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }

    d.sort_by(|a, b| a.partial_cmp(b).unwrap());
    Ok(d)
}
