//! Pairing of port-C and port-D hits by arrival time.

use super::{ClusterHit, Port};
use crate::error::{Error, Result};

/// Indices into the hit list of one C hit and one D hit.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Coincidence {
    pub c: usize,
    pub d: usize,
}

/// Greedy nearest-in-time matching: all C–D candidates with `|Δt| ≤ window`
/// are accepted in order of increasing `|Δt|`, each hit used at most once.
/// Hits must be time-sorted. The result is ordered by the C hit.
pub fn find_coincidences(hits: &[ClusterHit], window_ns: f64) -> Result<Vec<Coincidence>> {
    if let Some(k) = hits.windows(2).position(|w| w[1].t < w[0].t) {
        return Err(Error::Unsorted(k + 1));
    }
    let idx = |p: Port| -> Vec<usize> { (0..hits.len()).filter(|&i| hits[i].port == p).collect() };
    let (cs, ds) = (idx(Port::C), idx(Port::D));

    let mut candidates: Vec<(f64, usize, usize)> = Vec::new();
    let mut lo = 0;
    for &c in &cs {
        let t = hits[c].t;
        while lo < ds.len() && hits[ds[lo]].t < t - window_ns {
            lo += 1;
        }
        for &d in ds[lo..].iter().take_while(|&&d| hits[d].t <= t + window_ns) {
            candidates.push(((hits[d].t - t).abs(), c, d));
        }
    }
    candidates.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));

    let mut used = vec![false; hits.len()];
    let mut out = Vec::new();
    for (_, c, d) in candidates {
        if !used[c] && !used[d] {
            used[c] = true;
            used[d] = true;
            out.push(Coincidence { c, d });
        }
    }
    out.sort_by_key(|p| p.c);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn hit(port: Port, t: f64) -> ClusterHit {
        ClusterHit {
            port,
            cx: 0.0,
            cy: 0.0,
            t,
            n_pixels: 1,
        }
    }

    #[test]
    fn within_half_window_pairs() {
        let hits = [hit(Port::C, 0.0), hit(Port::D, 25.0)];
        assert_eq!(find_coincidences(&hits, 50.0).unwrap(), vec![Coincidence { c: 0, d: 1 }]);
        let hits = [hit(Port::C, 0.0), hit(Port::D, 50.5)];
        assert!(find_coincidences(&hits, 50.0).unwrap().is_empty());
    }

    #[test]
    fn each_hit_used_once() {
        let hits = [hit(Port::C, 0.0), hit(Port::C, 3.0), hit(Port::D, 4.0)];
        let pairs = find_coincidences(&hits, 50.0).unwrap();
        assert_eq!(pairs, vec![Coincidence { c: 1, d: 2 }]);
    }

    #[test]
    fn same_port_never_pairs() {
        let hits = [hit(Port::D, 0.0), hit(Port::D, 1.0)];
        assert!(find_coincidences(&hits, 50.0).unwrap().is_empty());
    }

    #[test]
    fn unsorted_rejected() {
        let hits = [hit(Port::C, 5.0), hit(Port::D, 1.0)];
        assert!(find_coincidences(&hits, 50.0).is_err());
    }
}
