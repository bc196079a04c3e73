use std::f64::consts::PI;

use super::domain::Condition;

/// The `count` smallest eigenvalues `Σ_j (π k_j / L_j)^2` of the continuum
/// Laplacian on a rectangular box, ascending with multiplicity.
///
/// Neumann uses `k_j >= 0`, Dirichlet `k_j >= 1`.
pub fn continuum_box_eigenvalues(lengths: &[f64], bc: Condition, count: usize) -> Vec<f64> {
    if lengths.is_empty() || count == 0 {
        return Vec::new();
    }
    let k0: u64 = match bc {
        Condition::Neumann => 0,
        Condition::Dirichlet => 1,
    };
    let unit: Vec<f64> = lengths.iter().map(|l| (PI / l).powi(2)).collect();
    let base: f64 = unit.iter().map(|u| u * (k0 * k0) as f64).sum();
    let mut bound = base + unit.iter().copied().fold(0.0, f64::max) * (count as f64 + 1.0);
    loop {
        let mut found = Vec::new();
        enumerate(&unit, k0, bound, 0, 0.0, &mut found);
        if found.len() >= count {
            found.sort_by(f64::total_cmp);
            found.truncate(count);
            return found;
        }
        bound *= 2.0;
    }
}

fn enumerate(unit: &[f64], k0: u64, bound: f64, axis: usize, partial: f64, out: &mut Vec<f64>) {
    if axis == unit.len() {
        out.push(partial);
        return;
    }
    let rest_min: f64 = unit[axis + 1..].iter().map(|u| u * (k0 * k0) as f64).sum();
    let mut k = k0;
    loop {
        let v = partial + unit[axis] * (k * k) as f64;
        if v + rest_min > bound {
            break;
        }
        enumerate(unit, k0, bound, axis + 1, v, out);
        k += 1;
    }
}
