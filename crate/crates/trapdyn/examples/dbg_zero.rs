fn main() {
    for n in [2usize, 3, 5] {
        let sys = trapdyn::systems::zero_system(n);
        let res = trapdyn::solve_existence(&sys, &trapdyn::SolverOptions::default()).unwrap();
        let z = res.certificate.as_ref().unwrap();
        println!("n={n} a*={:.3e} status={:?} Z diag={:?} offmax={:.3e}", res.a_star, res.status,
            (0..n).map(|i| z[(i,i)]).collect::<Vec<_>>(),
            (0..n).flat_map(|i| (0..n).filter(move |&j| j!=i).map(move |j| (i,j))).map(|(i,j)| z[(i,j)].abs()).fold(0.0f64, f64::max));
    }
}
