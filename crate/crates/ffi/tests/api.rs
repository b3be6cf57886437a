use std::ffi::CStr;
use std::ptr;

use kickback_ffi::*;

fn last_error() -> String {
    unsafe { CStr::from_ptr(kb_last_error()) }
        .to_string_lossy()
        .into_owned()
}

fn unitary(re: &[f64], im: &[f64]) -> *mut KbUnitary {
    let mut u = ptr::null_mut();
    let status = unsafe { kb_unitary_new(1, re.as_ptr(), im.as_ptr(), &mut u) };
    assert_eq!(status, KbStatus::Ok, "{}", last_error());
    u
}

fn state(re: &[f64]) -> *mut KbState {
    let mut s = ptr::null_mut();
    let n = re.len().trailing_zeros();
    let status = unsafe { kb_state_new(n, re.as_ptr(), ptr::null(), &mut s) };
    assert_eq!(status, KbStatus::Ok, "{}", last_error());
    s
}

#[test]
fn phase_estimate_of_diagonal_phase_gate() {
    let phi: f64 = 2.0;
    let u = unitary(&[1.0, 0.0, 0.0, phi.cos()], &[0.0, 0.0, 0.0, phi.sin()]);
    let s = state(&[0.0, 1.0]);
    let rng = kb_rng_new(1);
    let mut out = KbPhaseResult::default();
    unsafe {
        assert_eq!(kb_phase_estimate(u, s, 1.0 / 256.0, 0.0, rng, &mut out), KbStatus::Ok);
        assert_eq!(out.n_bits, 8);
        assert_eq!(out.ledger.u_uses, 255);
        assert_eq!(out.ledger.state_preps, 1);
        assert!((out.phase - phi).abs() < 0.1);

        assert_eq!(kb_phase_estimate(u, s, 1.0 / 256.0, 0.95, rng, &mut out), KbStatus::Ok);
        assert!((out.phase - phi).abs() < std::f64::consts::TAU / 256.0);
        kb_unitary_free(u);
        kb_state_free(s);
        kb_rng_free(rng);
    }
}

#[test]
fn amplitude_and_overlap_agree_with_exact_value() {
    // Hadamard on |0⟩: ⟨0|H|0⟩ = 1/√2
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let u = unitary(&[h, h, h, -h], &[0.0; 4]);
    let s = state(&[1.0, 0.0]);
    let rng = kb_rng_new(2);
    let mut amp = KbAmplitudeResult::default();
    let mut ov = KbOverlapResult::default();
    unsafe {
        assert_eq!(kb_amplitude_estimate(u, s, 0.02, 0.9, rng, &mut amp), KbStatus::Ok);
        assert!((amp.amplitude.acos() - h.acos()).abs() <= 0.02 + 1e-9);
        assert_eq!(kb_overlap_estimate(u, s, 0.05, 0.9, rng, &mut ov), KbStatus::Ok);
        assert!((ov.re - h).abs() < 0.06 && ov.im.abs() < 0.06);
        assert!(ov.ledger.u_uses > amp.ledger.u_uses);
        kb_unitary_free(u);
        kb_state_free(s);
        kb_rng_free(rng);
    }
}

#[test]
fn expectation_estimate_with_bounded_tail() {
    let a = [0.5, 0.2, 0.2, -0.3];
    let mut h = ptr::null_mut();
    let s = state(&[0.6, 0.8]);
    let rng = kb_rng_new(3);
    let tail = KbTail {
        kind: KbTailKind::Bounded,
        param: 2.0,
        coefficient: 0.0,
        b: 1.0,
    };
    let mut exact = 0.0;
    let mut out = KbExpectationResult::default();
    unsafe {
        assert_eq!(kb_hamiltonian_new(1, a.as_ptr(), ptr::null(), &mut h), KbStatus::Ok);
        assert_eq!(kb_expectation_exact(h, s, &mut exact), KbStatus::Ok);
        assert!((exact - (0.36 * 0.5 + 2.0 * 0.48 * 0.2 - 0.64 * 0.3)).abs() < 1e-12);
        assert_eq!(
            kb_expectation_estimate(h, s, &tail, 0.05, 0.9, 2, 0, rng, &mut out),
            KbStatus::Ok
        );
        assert!((out.value - exact).abs() < 0.05);
        assert_eq!(out.stage2_skipped, 0);
        assert!(out.ledger.evolution_uses > 0 && out.ledger.total_time > 0.0);
        kb_hamiltonian_free(h);
        kb_state_free(s);
        kb_rng_free(rng);
    }
}

#[test]
fn equal_seeds_give_equal_results() {
    let u = unitary(&[0.6, -0.8, 0.8, 0.6], &[0.0; 4]);
    let s = state(&[0.6, 0.8]);
    let run = |seed| {
        let rng = kb_rng_new(seed);
        let mut out = KbOverlapResult::default();
        unsafe {
            assert_eq!(kb_overlap_estimate(u, s, 0.05, 0.9, rng, &mut out), KbStatus::Ok);
            kb_rng_free(rng);
        }
        (out.re, out.im, out.ledger)
    };
    assert_eq!(run(9), run(9));
    unsafe {
        kb_unitary_free(u);
        kb_state_free(s);
    }
}

#[test]
fn errors_map_to_status_codes() {
    let mut u = ptr::null_mut();
    let mut s = ptr::null_mut();
    unsafe {
        // not unitary
        let status = kb_unitary_new(1, [1.0, 1.0, 0.0, 1.0].as_ptr(), ptr::null(), &mut u);
        assert_eq!(status, KbStatus::InvalidOperand);
        assert!(!last_error().is_empty());
        assert!(u.is_null());

        // not normalized
        assert_eq!(
            kb_state_new(1, [1.0, 1.0].as_ptr(), ptr::null(), &mut s),
            KbStatus::InvalidOperand
        );
        assert_eq!(
            kb_state_new(0, [1.0].as_ptr(), ptr::null(), &mut s),
            KbStatus::InvalidOperand
        );
        assert_eq!(
            kb_unitary_new(1, ptr::null(), ptr::null(), &mut u),
            KbStatus::NullPointer
        );
        assert!(last_error().contains("null"));

        let w = unitary(&[1.0, 0.0, 0.0, 1.0], &[0.0; 4]);
        let st = state(&[1.0, 0.0]);
        let mut out = KbPhaseResult::default();
        assert_eq!(
            kb_phase_estimate(w, st, 0.1, 0.0, ptr::null_mut(), &mut out),
            KbStatus::NullPointer
        );
        let rng = kb_rng_new(0);
        assert_eq!(
            kb_phase_estimate(w, st, -1.0, 0.0, rng, &mut out),
            KbStatus::InvalidOperand
        );
        assert_eq!(
            kb_phase_estimate(w, st, 1e-30, 0.0, rng, &mut out),
            KbStatus::ResourceLimit
        );
        assert_eq!(kb_phase_estimate(w, st, 0.1, 0.0, rng, &mut out), KbStatus::Ok);
        assert!(last_error().is_empty());

        kb_unitary_free(w);
        kb_state_free(st);
        kb_rng_free(rng);
        // freeing null is a no-op
        kb_unitary_free(ptr::null_mut());
        kb_state_free(ptr::null_mut());
        kb_hamiltonian_free(ptr::null_mut());
        kb_rng_free(ptr::null_mut());
    }
}

#[test]
fn point_tail_skips_stage_two() {
    let a = [0.25, 0.0, 0.0, -0.5];
    let mut h = ptr::null_mut();
    let s = state(&[0.0, 1.0]);
    let rng = kb_rng_new(4);
    let tail = KbTail {
        kind: KbTailKind::Point,
        param: 0.0,
        coefficient: 0.0,
        b: 1.0,
    };
    let mut out = KbExpectationResult::default();
    unsafe {
        assert_eq!(kb_hamiltonian_new(1, a.as_ptr(), ptr::null(), &mut h), KbStatus::Ok);
        assert_eq!(
            kb_expectation_estimate(h, s, &tail, 0.05, 0.9, 0, 0, rng, &mut out),
            KbStatus::Ok
        );
        assert_eq!(out.stage2_skipped, 1);
        assert!((out.value + 0.5).abs() < 0.05);
        kb_hamiltonian_free(h);
        kb_state_free(s);
        kb_rng_free(rng);
    }
}
