use router_core::nn::{make_synthetic_dataset, BodyPartClass, LabeledExample};

fn class_mean(examples: &[LabeledExample], class: BodyPartClass) -> Vec<f64> {
    let members: Vec<_> = examples.iter().filter(|e| e.label == class).collect();
    let mut mean = vec![0.0; members[0].image.values().len()];
    for e in &members {
        for (m, &v) in mean.iter_mut().zip(e.image.values()) {
            *m += v as f64 / members.len() as f64;
        }
    }
    mean
}

fn l2(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).powi(2))
        .sum::<f64>()
        .sqrt()
}

/// Class means from two independently seeded datasets must agree far more
/// closely than the means of any two different classes.
#[test]
fn class_means_are_well_separated() {
    let a = make_synthetic_dataset(200, 32, 1);
    let b = make_synthetic_dataset(200, 32, 2);
    let ma: Vec<_> = BodyPartClass::ALL
        .iter()
        .map(|&c| class_mean(&a, c))
        .collect();
    let mb: Vec<_> = BodyPartClass::ALL
        .iter()
        .map(|&c| class_mean(&b, c))
        .collect();
    let mut min_inter = f64::INFINITY;
    for i in 0..ma.len() {
        for j in i + 1..ma.len() {
            min_inter = min_inter.min(l2(&ma[i], &ma[j]));
        }
    }
    let max_intra = (0..ma.len())
        .map(|i| l2(&ma[i], &mb[i]))
        .fold(0.0, f64::max);
    assert!(
        min_inter > 5.0 * max_intra,
        "closest classes {min_inter:.3}, widest same-class gap {max_intra:.3}"
    );
}
