use isingopt::cli::generate::{maxcut_model, ring_edges};
use isingopt::{cim_solve, enumerate_ising, CimParams, IsingModel};

fn ground(model: &IsingModel) -> f64 {
    enumerate_ising(model, 24).unwrap().best_value
}

#[test]
fn ten_node_ring_reaches_ground_in_most_runs() {
    let model = maxcut_model(10, &ring_edges(10, 1.0));
    let target = ground(&model);
    let hits = (0..50)
        .filter(|&seed| {
            let r = cim_solve(
                &model,
                &CimParams {
                    seed,
                    ..Default::default()
                },
            )
            .unwrap();
            (r.best_energy - target).abs() < 1e-9
        })
        .count();
    println!("10-ring ground hits: {hits}/50");
    assert!(hits >= 40, "{hits}/50");
}

#[test]
fn every_small_ternary_model_solved_by_majority() {
    let pairs: Vec<(usize, usize)> = (0..4)
        .flat_map(|i| (i + 1..4).map(move |j| (i, j)))
        .collect();
    let mut worst = 20;
    for code in 0..3usize.pow(pairs.len() as u32) {
        let mut rest = code;
        let couplings: Vec<(usize, usize, f64)> = pairs
            .iter()
            .map(|&(i, j)| {
                let v = (rest % 3) as f64 - 1.0;
                rest /= 3;
                (i, j, v)
            })
            .filter(|c| c.2 != 0.0)
            .collect();
        let model = IsingModel::new(4, couplings, vec![0.0; 4], 0.0).unwrap();
        let target = ground(&model);
        let hits = (0..20)
            .filter(|&seed| {
                let r = cim_solve(
                    &model,
                    &CimParams {
                        seed,
                        ..Default::default()
                    },
                )
                .unwrap();
                (r.best_energy - target).abs() < 1e-9
            })
            .count();
        worst = worst.min(hits);
        assert!(hits > 10, "model {code}: {hits}/20");
    }
    println!("worst 4-spin hit count: {worst}/20");
}
