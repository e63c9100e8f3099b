use crate::linalg::rel_distance;
use crate::solver::ChartSolution;
use crate::C64;

/// Greedy clustering: an item joins the first cluster whose representative is
/// within `tol`; each cluster keeps its lowest-residual member.
pub(crate) fn cluster<T>(
    items: Vec<T>,
    key: impl Fn(&T) -> &[C64],
    residual: impl Fn(&T) -> f64,
    tol: f64,
) -> Vec<(T, usize)> {
    let mut reps: Vec<(T, usize)> = Vec::new();
    for item in items {
        match reps.iter().position(|(r, _)| rel_distance(key(r), key(&item)) < tol) {
            Some(i) => {
                reps[i].1 += 1;
                if residual(&item) < residual(&reps[i].0) {
                    reps[i].0 = item;
                }
            }
            None => reps.push((item, 1)),
        }
    }
    reps
}

/// Merges solutions whose canonical chart coordinates agree to relative
/// distance `tol`; representatives are the lowest-residual members.
pub fn deduplicate(points: Vec<ChartSolution>, tol: f64) -> Vec<ChartSolution> {
    cluster(points, |p| &p.key, |p| p.residual, tol).into_iter().map(|(p, _)| p).collect()
}
