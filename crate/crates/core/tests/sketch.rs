use tensor_ring::rng::{gaussian_matrix, gaussian_tensor, rng_from_seed};
use tensor_ring::{
    back_project, rse, rtrals, rtrsvd, sketch, trals, trsvd, DenseTensor, Matrix, ProjectionSpec, SolverConfig,
    TRFactors,
};

/// Orthonormal `rows × cols` matrix by modified Gram-Schmidt.
fn orthonormal(rows: usize, cols: usize, seed: u64) -> Matrix {
    let g = gaussian_matrix(rows, cols, &mut rng_from_seed(seed)).unwrap();
    let mut q: Vec<Vec<f64>> = (0..cols).map(|j| (0..rows).map(|i| g.get(i, j)).collect()).collect();
    for j in 0..cols {
        let (done, rest) = q.split_at_mut(j);
        let col = &mut rest[0];
        for prev in done.iter() {
            let dot: f64 = col.iter().zip(prev).map(|(a, b)| a * b).sum();
            col.iter_mut().zip(prev).for_each(|(a, b)| *a -= dot * b);
        }
        let norm = col.iter().map(|v| v * v).sum::<f64>().sqrt();
        col.iter_mut().for_each(|v| *v /= norm);
    }
    Matrix::from_fn(rows, cols, |i, j| q[j][i]).unwrap()
}

fn rel_diff(a: &DenseTensor, b: &DenseTensor) -> f64 {
    a.distance(b).unwrap() / b.frobenius_norm()
}

fn lift_all(t: &DenseTensor, bases: &[Matrix]) -> DenseTensor {
    bases
        .iter()
        .enumerate()
        .fold(t.clone(), |acc, (n, q)| acc.mode_n_product(n, q).unwrap())
}

fn als(ranks: Vec<usize>) -> SolverConfig {
    SolverConfig {
        tolerance: 0.0,
        ..SolverConfig::with_ranks(ranks)
    }
}

#[test]
fn low_multilinear_rank_is_captured() {
    let core = gaussian_tensor(&[2, 2, 2], &mut rng_from_seed(50)).unwrap();
    let factors: Vec<Matrix> = (0..3).map(|n| orthonormal(8, 2, 51 + n)).collect();
    let x = lift_all(&core, &factors);
    let sk = sketch(&x, &ProjectionSpec::new(vec![2, 2, 2], 7)).unwrap();
    assert_eq!(sk.projected.shape(), &[2, 2, 2]);
    assert!(rse(&x, &sk.lift().unwrap()).unwrap() < 1e-8);
}

#[test]
fn projected_is_x_times_basis_transposes() {
    let x = gaussian_tensor(&[9, 7, 6], &mut rng_from_seed(52)).unwrap();
    let sk = sketch(&x, &ProjectionSpec::new(vec![4, 7, 3], 8)).unwrap();
    let transposes: Vec<Matrix> = sk.bases.iter().map(Matrix::transpose).collect();
    let expected = lift_all(&x, &transposes);
    assert!(rel_diff(&sk.projected, &expected) < 1e-10);
    for q in &sk.bases {
        assert!(q.orthonormality_defect() < 1e-10);
    }
    // a strict sketch loses energy
    assert!(sk.projected.frobenius_norm() < x.frobenius_norm());
}

#[test]
fn identity_projection_reproduces_plain_solvers() {
    let x = gaussian_tensor(&[6, 5, 4], &mut rng_from_seed(53)).unwrap();
    let spec = ProjectionSpec::identity(x.shape());
    let cfg = SolverConfig {
        max_sweeps: 10,
        ..als(vec![2, 3, 2])
    };
    let plain = trals(&x, &cfg).unwrap();
    let randomized = rtrals(&x, &cfg, &spec).unwrap();
    assert_eq!(plain.factors, randomized.factors);
    assert_eq!(plain.final_rse(), randomized.final_rse());

    let cfg = SolverConfig::with_tolerance(0.3);
    let plain = trsvd(&x, &cfg).unwrap();
    let randomized = rtrsvd(&x, &cfg, &spec).unwrap();
    assert_eq!(plain.factors, randomized.factors);
    assert!((plain.final_rse() - randomized.final_rse()).abs() < 1e-8);
}

#[test]
fn rtrals_recovers_exact_ring_from_sketch() {
    let x = TRFactors::random(&[30, 30, 30], &[3, 4, 3], &mut rng_from_seed(54))
        .unwrap()
        .reconstruct_full();
    let report = rtrals(&x, &als(vec![3, 4, 3]), &ProjectionSpec::new(vec![15, 15, 15], 9)).unwrap();
    assert_eq!(report.factors.dims(), vec![30, 30, 30]);
    assert!(report.final_rse() < 1e-4, "{}", report.final_rse());
    let recomputed = rse(&x, &report.factors.reconstruct_full()).unwrap();
    assert!((recomputed - report.final_rse()).abs() < 1e-12);
}

#[test]
fn back_projection_commutes_with_reconstruction() {
    let dims_small = [3, 4, 2, 3];
    let dims_big = [7, 4, 5, 6];
    let z = TRFactors::random(&dims_small, &[2, 3, 2, 2], &mut rng_from_seed(55)).unwrap();
    let bases: Vec<Matrix> = dims_big
        .iter()
        .zip(&dims_small)
        .enumerate()
        .map(|(n, (&i, &k))| orthonormal(i, k, 60 + n as u64))
        .collect();
    let lifted = back_project(&z, &bases).unwrap();
    assert_eq!(lifted.dims(), dims_big.to_vec());
    assert_eq!(lifted.ranks(), z.ranks());
    let expected = lift_all(&z.reconstruct_full(), &bases);
    assert!(rel_diff(&lifted.reconstruct_full(), &expected) < 1e-10);
}

#[test]
fn rank_one_back_projection_is_outer_product() {
    let z = TRFactors::random(&[2, 3, 2], &[1, 1, 1], &mut rng_from_seed(56)).unwrap();
    let bases = [orthonormal(5, 2, 70), orthonormal(4, 3, 71), orthonormal(6, 2, 72)];
    let vecs: Vec<Vec<f64>> = z
        .cores()
        .iter()
        .zip(&bases)
        .map(|(c, q)| {
            (0..q.rows())
                .map(|i| (0..q.cols()).map(|k| q.get(i, k) * c.data()[k]).sum())
                .collect()
        })
        .collect();
    let expected = DenseTensor::from_fn(&[5, 4, 6], |i| vecs[0][i[0]] * vecs[1][i[1]] * vecs[2][i[2]]).unwrap();
    let got = back_project(&z, &bases).unwrap().reconstruct_full();
    assert!(rel_diff(&got, &expected) < 1e-12);
}

#[test]
fn sketch_never_grows_the_norm() {
    let mut rng = rng_from_seed(57);
    for trial in 0..20 {
        let shape = [3 + trial % 4, 4 + trial % 3, 2 + trial % 5];
        let x = gaussian_tensor(&shape, &mut rng).unwrap();
        let sizes = shape.iter().map(|&i| 1 + (i + trial) % i).collect();
        let sk = sketch(&x, &ProjectionSpec::new(sizes, trial as u64)).unwrap();
        assert!(sk.projected.frobenius_norm() <= x.frobenius_norm() * (1.0 + 1e-12));
    }
}

#[test]
fn runs_are_deterministic() {
    let x = gaussian_tensor(&[12, 10, 8], &mut rng_from_seed(58)).unwrap();
    let spec = ProjectionSpec::new(vec![6, 5, 8], 11);
    assert_eq!(sketch(&x, &spec).unwrap(), sketch(&x, &spec).unwrap());
    let cfg = SolverConfig {
        max_sweeps: 5,
        seed: 3,
        ..als(vec![2, 2, 2])
    };
    let a = rtrals(&x, &cfg, &spec).unwrap();
    let b = rtrals(&x, &cfg, &spec).unwrap();
    assert_eq!(a.factors, b.factors);
    assert_eq!(a.rse_history, b.rse_history);
    let other = sketch(&x, &ProjectionSpec::new(vec![6, 5, 8], 12)).unwrap();
    assert_ne!(other, sketch(&x, &spec).unwrap());
}

#[test]
fn randomized_error_splits_into_sketch_and_solver_parts() {
    let mut rng = rng_from_seed(59);
    for trial in 0..10u64 {
        let x = gaussian_tensor(&[10, 9, 8], &mut rng).unwrap();
        let spec = ProjectionSpec::new(vec![6, 5, 8], trial);
        let cfg = SolverConfig {
            max_sweeps: 8,
            ..als(vec![2, 2, 2])
        };
        let report = rtrals(&x, &cfg, &spec).unwrap();
        let sk = sketch(&x, &spec).unwrap();
        let lift_rse = rse(&x, &sk.lift().unwrap()).unwrap();
        let small_rse = trals(&sk.projected, &cfg).unwrap().final_rse();
        assert!(report.final_rse() <= lift_rse + small_rse + 1e-8, "trial {trial}");
    }
}
