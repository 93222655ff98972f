use std::ffi::{c_char, CStr, CString};
use std::ptr;

use vortical::emden::{integrate, IntegrationConfig};
use vortical::presets::preset;
use vortical::regimes::{classify, period_quadrature, RegimeKind};
use vortical::solution::{eval_flow, QueryPoint, ScaleState};
use vortical_ffi::*;

fn last_error() -> String {
    let mut buf = [0 as c_char; 256];
    let n = unsafe { vortical_last_error_message(buf.as_mut_ptr(), buf.len()) };
    let s = unsafe { CStr::from_ptr(buf.as_ptr()) }
        .to_str()
        .unwrap()
        .to_owned();
    assert_eq!(n, s.len());
    s
}

fn from_preset(name: &str) -> *mut VorticalParams {
    let name = CString::new(name).unwrap();
    let mut h = ptr::null_mut();
    assert_eq!(
        unsafe { vortical_params_from_preset(name.as_ptr(), &mut h) },
        VorticalStatus::Ok
    );
    assert!(!h.is_null());
    h
}

fn values() -> VorticalParamValues {
    VorticalParamValues {
        gamma: 1.7,
        k: 0.8,
        xi: 0.6,
        lambda: -1.1,
        alpha: 1.0,
        a0: 1.2,
        a1: -0.2,
    }
}

#[test]
fn params_round_trip() {
    let v = values();
    let mut h = ptr::null_mut();
    unsafe {
        assert_eq!(vortical_params_new(&v, &mut h), VorticalStatus::Ok);
        let mut back = std::mem::zeroed();
        assert_eq!(vortical_params_values(h, &mut back), VorticalStatus::Ok);
        assert_eq!(back, v);
        vortical_params_free(h);
    }
    assert_eq!(last_error(), "");
}

#[test]
fn invalid_params_report_a_status_and_a_message() {
    let v = VorticalParamValues {
        gamma: 0.9,
        ..values()
    };
    let mut h = ptr::null_mut();
    assert_eq!(
        unsafe { vortical_params_new(&v, &mut h) },
        VorticalStatus::InvalidParams
    );
    assert!(h.is_null());
    let msg = last_error();
    assert!(msg.starts_with("InvalidParams"), "{msg}");
    assert_eq!(
        unsafe { vortical_params_validate(&v) },
        VorticalStatus::InvalidParams
    );
    // a later success clears the message
    assert_eq!(
        unsafe { vortical_params_validate(&values()) },
        VorticalStatus::Ok
    );
    assert_eq!(last_error(), "");
}

#[test]
fn null_pointers_are_rejected() {
    let v = values();
    unsafe {
        assert_eq!(
            vortical_params_new(ptr::null(), &mut ptr::null_mut()),
            VorticalStatus::NullPointer
        );
        assert_eq!(
            vortical_params_new(&v, ptr::null_mut()),
            VorticalStatus::NullPointer
        );
        assert_eq!(
            vortical_params_from_preset(ptr::null(), &mut ptr::null_mut()),
            VorticalStatus::NullPointer
        );
        let mut r = std::mem::zeroed();
        assert_eq!(
            vortical_classify(ptr::null(), &mut r),
            VorticalStatus::NullPointer
        );
        assert!(last_error().contains("params"));
        vortical_params_free(ptr::null_mut());
        vortical_trajectory_free(ptr::null_mut());
    }
}

#[test]
fn unknown_presets_are_reported() {
    let name = CString::new("no-such-preset").unwrap();
    let mut h = ptr::null_mut();
    assert_eq!(
        unsafe { vortical_params_from_preset(name.as_ptr(), &mut h) },
        VorticalStatus::UnknownPreset
    );
    assert!(last_error().contains("no-such-preset"));
}

#[test]
fn flow_samples_match_the_library() {
    let h = from_preset("generic");
    let p = preset("generic").unwrap().params();
    let st = VorticalScaleState {
        t: 0.0,
        a: 1.1,
        adot: 0.3,
    };
    let mut f = VorticalFlowSample {
        rho: 0.0,
        u1: 0.0,
        u2: 0.0,
        p: 0.0,
    };
    assert_eq!(
        unsafe { vortical_eval_flow(h, &st, 0.2, -0.4, &mut f) },
        VorticalStatus::Ok
    );
    let want = eval_flow(
        &p,
        &ScaleState::new(0.0, 1.1, 0.3),
        &QueryPoint::new(0.2, -0.4),
    )
    .unwrap();
    assert_eq!(
        (f.rho, f.u1, f.u2, f.p),
        (want.rho, want.u1, want.u2, want.p)
    );
    let collapsed = VorticalScaleState { a: 0.0, ..st };
    assert_eq!(
        unsafe { vortical_eval_flow(h, &collapsed, 0.0, 0.0, &mut f) },
        VorticalStatus::CollapsedState
    );
    unsafe { vortical_params_free(h) };
}

#[test]
fn trajectories_match_the_library() {
    let h = from_preset("periodic-demo");
    let p = preset("periodic-demo").unwrap().params();
    let cfg = vortical_integration_config_default(5.0);
    let mut tr = ptr::null_mut();
    unsafe {
        assert_eq!(vortical_integrate(h, &cfg, &mut tr), VorticalStatus::Ok);
        let want = integrate(&p, &IntegrationConfig::until(5.0)).unwrap();
        let mut st = VorticalScaleState {
            t: 0.0,
            a: 0.0,
            adot: 0.0,
        };
        assert_eq!(
            vortical_trajectory_state_at(tr, 2.5, &mut st),
            VorticalStatus::Ok
        );
        let w = want.state_at(2.5).unwrap();
        assert_eq!((st.a, st.adot), (w.a, w.adot));
        assert_eq!(
            vortical_trajectory_state_at(tr, 6.0, &mut st),
            VorticalStatus::OutOfRange
        );
        let mut s = std::mem::zeroed::<VorticalTrajectorySummary>();
        assert_eq!(vortical_trajectory_summary(tr, &mut s), VorticalStatus::Ok);
        assert!(!s.collapsed && s.t_star.is_nan());
        assert_eq!(
            (s.t_start, s.t_end, s.nodes),
            (0.0, 5.0, want.nodes().len())
        );
        assert!(s.energy_drift <= 1e-8);
        vortical_trajectory_free(tr);
    }
    let bad = VorticalIntegrationConfig {
        rel_tol: -1.0,
        ..cfg
    };
    let mut tr = ptr::null_mut();
    assert_eq!(
        unsafe { vortical_integrate(h, &bad, &mut tr) },
        VorticalStatus::InvalidArgument
    );
    assert!(tr.is_null());
    unsafe { vortical_params_free(h) };
}

#[test]
fn collapse_is_a_summary_not_an_error() {
    let h = from_preset("blowup-demo");
    let cfg = vortical_integration_config_default(50.0);
    let mut tr = ptr::null_mut();
    unsafe {
        assert_eq!(vortical_integrate(h, &cfg, &mut tr), VorticalStatus::Ok);
        let mut s = std::mem::zeroed::<VorticalTrajectorySummary>();
        assert_eq!(vortical_trajectory_summary(tr, &mut s), VorticalStatus::Ok);
        assert!(s.collapsed && s.t_star < 50.0 && s.error_bar >= 0.0);
        vortical_trajectory_free(tr);
        vortical_params_free(h);
    }
}

#[test]
fn classification_matches_the_library() {
    for (name, label) in [
        ("periodic-demo", "1"),
        ("blowup-demo", "2b-blowup"),
        ("gamma3-critical", "3bI-global"),
        ("gamma2-linear", "2aII"),
    ] {
        let h = from_preset(name);
        let want = classify(&preset(name).unwrap().params()).unwrap();
        let mut r = unsafe { std::mem::zeroed::<VorticalRegime>() };
        assert_eq!(unsafe { vortical_classify(h, &mut r) }, VorticalStatus::Ok);
        let got = unsafe { CStr::from_ptr(vortical_branch_label(r.branch)) }
            .to_str()
            .unwrap();
        assert_eq!(got, label);
        match want.kind {
            RegimeKind::TimePeriodic { period } => {
                assert_eq!(r.kind, VorticalRegimeKind::TimePeriodic);
                assert_eq!(r.period, period);
            }
            RegimeKind::FiniteTimeBlowup { t_star, .. } => {
                assert_eq!(r.kind, VorticalRegimeKind::FiniteTimeBlowup);
                assert_eq!(r.t_star, t_star);
                assert!(r.t_lo <= r.t_star && r.t_star <= r.t_hi);
            }
            RegimeKind::Steady { a_eq } => {
                assert_eq!((r.kind, r.a_eq), (VorticalRegimeKind::Steady, a_eq))
            }
            RegimeKind::Global => {
                assert!(r.kind == VorticalRegimeKind::Global && r.period.is_nan())
            }
        }
        unsafe { vortical_params_free(h) };
    }
}

#[test]
fn period_matches_the_library_and_rejects_equilibria() {
    let h = from_preset("periodic-demo");
    let want = period_quadrature(&preset("periodic-demo").unwrap().params()).unwrap();
    let mut r = unsafe { std::mem::zeroed::<VorticalPeriod>() };
    assert_eq!(unsafe { vortical_period(h, &mut r) }, VorticalStatus::Ok);
    assert_eq!(
        (r.period, r.a_min, r.a_max, r.truncated),
        (want.period, want.a_min, want.a_max, false)
    );
    unsafe { vortical_params_free(h) };

    let eq = from_preset("equilibrium");
    assert_eq!(
        unsafe { vortical_period(eq, &mut r) },
        VorticalStatus::DegenerateOrbit
    );
    assert!(last_error().starts_with("DegenerateOrbit"));
    unsafe { vortical_params_free(eq) };
}

#[test]
fn error_messages_truncate_to_the_buffer() {
    let v = VorticalParamValues {
        xi: f64::NAN,
        ..values()
    };
    assert_ne!(unsafe { vortical_params_validate(&v) }, VorticalStatus::Ok);
    let full = unsafe { vortical_last_error_message(ptr::null_mut(), 0) };
    assert!(full > 8);
    let mut buf = [1 as c_char; 8];
    assert_eq!(
        unsafe { vortical_last_error_message(buf.as_mut_ptr(), buf.len()) },
        full
    );
    assert_eq!(unsafe { CStr::from_ptr(buf.as_ptr()) }.to_bytes().len(), 7);
}

#[test]
fn messages_are_per_thread() {
    let v = VorticalParamValues {
        gamma: 0.5,
        ..values()
    };
    assert_ne!(unsafe { vortical_params_validate(&v) }, VorticalStatus::Ok);
    let other = std::thread::spawn(|| unsafe { vortical_last_error_message(ptr::null_mut(), 0) })
        .join()
        .unwrap();
    assert_eq!(other, 0);
    assert!(!last_error().is_empty());
}

#[test]
fn status_names_are_static_strings() {
    let name = |s| {
        unsafe { CStr::from_ptr(vortical_status_name(s)) }
            .to_str()
            .unwrap()
    };
    assert_eq!(name(VorticalStatus::Ok), "Ok");
    assert_eq!(name(VorticalStatus::DegenerateOrbit), "DegenerateOrbit");
    assert_eq!(VorticalStatus::Ok as i32, 0);
}
