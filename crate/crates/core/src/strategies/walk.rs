use crate::tree::{BlackBoxTree, ExplorationSession, NodeId, SessionError};

/// Walks from `v` to a leaf, taking a uniformly random child at every step.
pub fn random_walk<T: BlackBoxTree + ?Sized>(
    session: &mut ExplorationSession<'_, T>,
    v: NodeId,
) -> Result<NodeId, SessionError> {
    let mut u = v;
    while let Some(c) = session.random_child(u)? {
        u = c;
    }
    Ok(u)
}

/// Like [`random_walk`] but gives up after `cap` steps. `Ok(None)` means the
/// walk was aborted; whatever it explored stays explored and paid for.
pub fn capped_walk<T: BlackBoxTree + ?Sized>(
    session: &mut ExplorationSession<'_, T>,
    v: NodeId,
    cap: usize,
) -> Result<Option<NodeId>, SessionError> {
    let mut u = v;
    let mut steps = 0;
    while session.degree(u)? > 0 {
        if steps == cap {
            return Ok(None);
        }
        u = session.random_child(u)?.expect("internal node has a child");
        steps += 1;
    }
    Ok(Some(u))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::{gen_mh, gen_pruned_pair};

    #[test]
    fn walks_on_mh_have_length_h() {
        let m5 = gen_mh(5).unwrap();
        let mut s = ExplorationSession::new(&m5, 3);
        let s_root = s.root();
        for _ in 0..50 {
            let l = random_walk(&mut s, s_root).unwrap();
            assert_eq!(s.depth(l).unwrap(), 5);
        }
    }

    #[test]
    fn leaf_start_is_free() {
        let m0 = gen_mh(0).unwrap();
        let mut s = ExplorationSession::new(&m0, 0);
        let s_root = s.root();
        assert_eq!(random_walk(&mut s, s_root).unwrap(), s.root());
        assert_eq!(capped_walk(&mut s, s_root, 0).unwrap(), Some(s.root()));
        assert_eq!(s.cost(), 0);
    }

    #[test]
    fn cap_zero_aborts_on_internal_root() {
        let m2 = gen_mh(2).unwrap();
        let mut s = ExplorationSession::new(&m2, 0);
        let s_root = s.root();
        assert_eq!(capped_walk(&mut s, s_root, 0).unwrap(), None);
        assert_eq!(s.cost(), 0);
    }

    #[test]
    fn cap_at_height_matches_uncapped_walk() {
        let m4 = gen_mh(4).unwrap();
        for seed in 0..20 {
            let mut a = ExplorationSession::new(&m4, seed);
            let a_root = a.root();
            let mut b = ExplorationSession::new(&m4, seed);
            let b_root = b.root();
            let la = random_walk(&mut a, a_root).unwrap();
            let lb = capped_walk(&mut b, b_root, 4).unwrap();
            assert_eq!(Some(la), lb);
            assert_eq!(a.cost(), b.cost());
        }
    }

    #[test]
    fn short_cap_keeps_shallow_leaves_and_drops_deep_ones() {
        // Leaves of a pruned pair sit between depth h and 2h.
        let (t, _) = gen_pruned_pair(4, 0.4, 9, false).unwrap();
        let cap = 5;
        let mut s = ExplorationSession::new(&t, 1);
        let s_root = s.root();
        let (mut kept, mut aborted) = (0, 0);
        for _ in 0..400 {
            let before = s.cost();
            match capped_walk(&mut s, s_root, cap).unwrap() {
                Some(l) => {
                    assert!(s.depth(l).unwrap() <= cap);
                    kept += 1;
                }
                None => {
                    assert!(s.cost() >= before);
                    aborted += 1;
                }
            }
        }
        assert!(kept > 0 && aborted > 0, "kept {kept}, aborted {aborted}");
    }
}
