//! Finite-difference verification of every layer's backward pass and of
//! the assembled network, over 20 independent random draws.

use std::collections::BTreeMap;

use router_core::nn::gradcheck::{check_layers, check_network, check_network_loss, GradCheck};

const DRAWS: u64 = 20;
const TOLERANCE: f64 = 1e-4;

fn assert_mostly_checked(seed: u64, c: &GradCheck) {
    // kink crossings must stay a small minority, or the check would say little
    assert!(
        c.skipped * 10 <= c.coordinates + c.skipped,
        "draw {seed}: {c:?}"
    );
}

#[test]
fn every_layer_matches_central_differences() {
    let mut worst = BTreeMap::<String, f64>::new();
    for seed in 0..DRAWS {
        for c in check_layers(seed) {
            assert!(c.max_rel_error < TOLERANCE, "draw {seed}: {c:?}");
            let e = worst.entry(c.name).or_default();
            *e = e.max(c.max_rel_error);
        }
    }
    for (name, err) in &worst {
        println!("{name:<20} max relative error {err:.3e}");
    }
    assert_eq!(worst.len(), 11);
}

#[test]
fn whole_network_backward_matches_central_differences() {
    for seed in 0..DRAWS {
        let c = check_network(seed, 8).unwrap();
        println!(
            "draw {seed:>2}: max relative error {:.3e} over {} coordinates ({} skipped)",
            c.max_rel_error, c.coordinates, c.skipped
        );
        assert!(c.max_rel_error < TOLERANCE, "draw {seed}: {c:?}");
        assert_mostly_checked(seed, &c);
    }
}

#[test]
fn whole_network_loss_gradient_matches_central_differences() {
    for seed in 0..5 {
        let c = check_network_loss(seed, 8).unwrap();
        println!(
            "draw {seed}: max abs error {:.3e}, max relative error {:.3e} ({} skipped)",
            c.max_abs_error, c.max_rel_error, c.skipped
        );
        // truncation of central differences is O(h^2) = 1e-6 for an O(1) loss
        assert!(c.max_abs_error < 1e-6, "draw {seed}: {c:?}");
        assert_mostly_checked(seed, &c);
    }
}
