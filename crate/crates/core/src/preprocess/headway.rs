//! Interaction classes for movement pairs that could share a track.
//!
//! Departure windows already bound every train's feasible timing, so many
//! pairwise separation requirements are decidable before the model is built.
//! Every deduction here is conservative: a class is only assigned when it
//! holds for all departures inside the windows and all reduction levels.

/// Inclusive bounds, in minutes, on a departure event.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct Window {
    pub lb: i64,
    pub ub: i64,
}

impl Window {
    pub fn is_empty(self) -> bool {
        self.lb > self.ub
    }

    pub fn contains(self, t: i64) -> bool {
        self.lb <= t && t <= self.ub
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum PairClass {
    /// The windows keep the pair so far apart that the separation requirement
    /// cannot bind; no row is needed.
    Implicit,
    /// The windows fix who moves first; one conditional row, no order binary.
    FixedOrder { first_is_a: bool },
    /// Either order is possible; an order binary selects one of two rows.
    FreeOrder,
    /// Opposite movements whose windows rule out both orders: the two trains
    /// can never share this track.
    Conflict,
}

/// Same direction, same departure node. `h_ab` is the headway when `a` leads.
pub fn classify_following(wa: Window, wb: Window, h_ab: i64, h_ba: i64) -> PairClass {
    if wa.ub < wb.lb {
        if wb.lb - wa.ub >= h_ab {
            PairClass::Implicit
        } else {
            PairClass::FixedOrder { first_is_a: true }
        }
    } else if wb.ub < wa.lb {
        if wa.lb - wb.ub >= h_ba {
            PairClass::Implicit
        } else {
            PairClass::FixedOrder { first_is_a: false }
        }
    } else {
        PairClass::FreeOrder
    }
}

/// Timing data for one opposite-direction pair on one section.
#[derive(Clone, Copy, Debug)]
pub struct CrossingTimes {
    pub travel_a: i64,
    /// `travel_a` minus the largest buyable time reduction.
    pub travel_a_min: i64,
    pub travel_b: i64,
    pub travel_b_min: i64,
    /// Buffer at the node where `a` arrives and `b` departs.
    pub clear_after_a: i64,
    /// Buffer at the node where `b` arrives and `a` departs.
    pub clear_after_b: i64,
}

/// Opposite directions on one track. Whoever is second must depart after the
/// first has arrived plus the node buffer.
pub fn classify_crossing(wa: Window, wb: Window, t: &CrossingTimes) -> PairClass {
    // "b first" needs d_a >= d_b + travel_b_eff (+ buffer); impossible when
    // even the best case overshoots a's window, and vice versa.
    let a_first_forced = wa.ub < wb.lb + t.travel_b_min;
    let b_first_forced = wb.ub < wa.lb + t.travel_a_min;
    match (a_first_forced, b_first_forced) {
        (true, true) => PairClass::Conflict,
        (true, false) => {
            if wb.lb >= wa.ub + t.travel_a + t.clear_after_a {
                PairClass::Implicit
            } else {
                PairClass::FixedOrder { first_is_a: true }
            }
        }
        (false, true) => {
            if wa.lb >= wb.ub + t.travel_b + t.clear_after_b {
                PairClass::Implicit
            } else {
                PairClass::FixedOrder { first_is_a: false }
            }
        }
        (false, false) => PairClass::FreeOrder,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn w(lb: i64, ub: i64) -> Window {
        Window { lb, ub }
    }

    #[test]
    fn following_far_apart_is_implicit() {
        assert_eq!(classify_following(w(10, 30), w(45, 60), 8, 8), PairClass::Implicit);
    }

    #[test]
    fn following_close_disjoint_fixes_the_order() {
        assert_eq!(
            classify_following(w(45, 60), w(63, 80), 8, 8),
            PairClass::FixedOrder { first_is_a: true }
        );
        assert_eq!(
            classify_following(w(63, 80), w(45, 60), 8, 8),
            PairClass::FixedOrder { first_is_a: false }
        );
    }

    #[test]
    fn following_overlap_leaves_the_order_free() {
        assert_eq!(classify_following(w(63, 80), w(69, 85), 8, 8), PairClass::FreeOrder);
    }

    #[test]
    fn following_gap_equal_to_headway_is_implicit() {
        assert_eq!(classify_following(w(0, 10), w(18, 25), 8, 8), PairClass::Implicit);
        assert_eq!(classify_following(w(0, 10), w(17, 25), 8, 8), PairClass::FixedOrder {
            first_is_a: true
        });
    }

    fn times(t_a: i64, t_b: i64, cap: i64, ct: i64) -> CrossingTimes {
        CrossingTimes {
            travel_a: t_a,
            travel_a_min: t_a - cap,
            travel_b: t_b,
            travel_b_min: t_b - cap,
            clear_after_a: ct,
            clear_after_b: ct,
        }
    }

    #[test]
    fn crossing_far_apart_is_implicit() {
        assert_eq!(
            classify_crossing(w(10, 20), w(50, 60), &times(10, 10, 2, 3)),
            PairClass::Implicit
        );
    }

    #[test]
    fn crossing_forced_but_tight_keeps_a_row() {
        assert_eq!(
            classify_crossing(w(10, 20), w(25, 40), &times(10, 10, 2, 3)),
            PairClass::FixedOrder { first_is_a: true }
        );
    }

    #[test]
    fn crossing_overlap_is_free() {
        assert_eq!(
            classify_crossing(w(10, 30), w(20, 40), &times(10, 10, 2, 3)),
            PairClass::FreeOrder
        );
    }

    #[test]
    fn crossing_same_tight_windows_conflict() {
        assert_eq!(
            classify_crossing(w(10, 12), w(10, 12), &times(10, 10, 2, 3)),
            PairClass::Conflict
        );
    }

    proptest! {
        /// Whatever the class claims must hold pointwise over the windows.
        #[test]
        fn following_class_claims_hold(
            lb_a in 0i64..60, len_a in 0i64..10,
            lb_b in 0i64..60, len_b in 0i64..10,
            h_ab in 1i64..15, h_ba in 1i64..15,
        ) {
            let wa = w(lb_a, lb_a + len_a);
            let wb = w(lb_b, lb_b + len_b);
            let class = classify_following(wa, wb, h_ab, h_ba);
            for d_a in wa.lb..=wa.ub {
                for d_b in wb.lb..=wb.ub {
                    match class {
                        PairClass::Implicit => {
                            // disjoint with a full headway in between
                            if wa.ub < wb.lb {
                                prop_assert!(d_b - d_a >= h_ab);
                            } else {
                                prop_assert!(d_a - d_b >= h_ba);
                            }
                        }
                        PairClass::FixedOrder { first_is_a } => {
                            if first_is_a {
                                prop_assert!(d_a < d_b);
                            } else {
                                prop_assert!(d_b < d_a);
                            }
                        }
                        PairClass::FreeOrder => {}
                        PairClass::Conflict => prop_assert!(false, "following never conflicts"),
                    }
                }
            }
        }

        #[test]
        fn crossing_class_claims_hold(
            lb_a in 0i64..40, len_a in 0i64..8,
            lb_b in 0i64..40, len_b in 0i64..8,
            t_a in 2i64..12, t_b in 2i64..12,
            cap in 0i64..2, ct in 0i64..4,
        ) {
            let wa = w(lb_a, lb_a + len_a);
            let wb = w(lb_b, lb_b + len_b);
            let t = times(t_a, t_b, cap, ct);
            let class = classify_crossing(wa, wb, &t);
            for d_a in wa.lb..=wa.ub {
                for d_b in wb.lb..=wb.ub {
                    let a_first_ok = d_b >= d_a + t.travel_a + t.clear_after_a;
                    let b_first_ok = d_a >= d_b + t.travel_b + t.clear_after_b;
                    // with the deepest reduction bought, a buffer-free bound
                    let a_first_possible = d_b >= d_a + t.travel_a_min;
                    let b_first_possible = d_a >= d_b + t.travel_b_min;
                    match class {
                        PairClass::Implicit => prop_assert!(a_first_ok || b_first_ok),
                        PairClass::FixedOrder { first_is_a: true } =>
                            prop_assert!(!b_first_possible),
                        PairClass::FixedOrder { first_is_a: false } =>
                            prop_assert!(!a_first_possible),
                        PairClass::Conflict =>
                            prop_assert!(!a_first_possible && !b_first_possible),
                        PairClass::FreeOrder => {}
                    }
                }
            }
        }
    }
}
