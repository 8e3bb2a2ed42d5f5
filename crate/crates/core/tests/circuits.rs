mod common;

use common::*;
use ga3ph_core::circuits::{clarke_project, mna_transfer, parse_netlist, Netlist};
use ga3ph_core::models::{build_rl_model, CircuitParams};
use rand::seq::SliceRandom;
use rand::Rng;

#[test]
fn mna_agrees_with_closed_form_for_random_parameters() {
    let mut r = rng(21);
    for _ in 0..50 {
        let p = CircuitParams::new(
            r.gen_range(1e-4..1e-1),
            r.gen_range(1e-4..1e-1),
            r.gen_range(0.5..200.0),
        )
        .unwrap();
        for balanced in [true, false] {
            let got =
                clarke_project(&mna_transfer(&Netlist::three_phase_rl(&p, balanced)).unwrap());
            let want = build_rl_model(&p, balanced);
            let err = got.coeff_rel_error(&want);
            assert!(err < 1e-8, "{p:?} balanced={balanced}: {err:e}");
        }
    }
}

#[test]
fn mna_is_invariant_under_relabeling_and_reordering() {
    let p = CircuitParams::example();
    let net = Netlist::three_phase_rl(&p, false);
    let reference = clarke_project(&mna_transfer(&net).unwrap());
    let mut r = rng(22);
    for _ in 0..5 {
        let mut text = net.to_text();
        for (old, new) in [(" n", " star"), (" la", " loada"), (" b ", " phb ")] {
            text = text.replace(old, new);
        }
        let mut lines: Vec<&str> = text.lines().collect();
        let split = lines.iter().position(|l| l.starts_with('.')).unwrap();
        lines[..split].shuffle(&mut r);
        let shuffled = lines.join("\n");
        let net2 = parse_netlist(&shuffled).unwrap();
        let got = clarke_project(&mna_transfer(&net2).unwrap());
        assert!(got.coeff_rel_error(&reference) < 1e-9);
    }
}

#[test]
fn bundled_style_netlist_with_comments_and_crlf() {
    let text = "# three-phase RL\r\nVa a 0 va\r\nVb b 0 vb\r\nVc c 0 vc\r\n\
                La a la 3e-3\r\nLb b lb 3e-2 # unbalanced phase\r\nLc c lc 3e-3\r\n\
                Ra la n 22\r\nRb lb n 22\r\nRc lc n 22\r\n\
                .inputs va vb vc\r\n.outputs LA lb lc\r\n.ground 0\r\n";
    let net = parse_netlist(text).unwrap();
    assert_eq!(net.elements.len(), 9);
    let got = clarke_project(&mna_transfer(&net).unwrap());
    let want = build_rl_model(&CircuitParams::example(), false);
    assert!(got.coeff_rel_error(&want) < 1e-8);
}
