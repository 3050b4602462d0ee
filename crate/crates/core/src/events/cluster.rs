//! Streaming connected-component clustering of pixel events.
//!
//! Two events of the same port are linked when they are within `gap_px`
//! (Euclidean) and `gap_ns` of each other. Only events inside the trailing
//! time window are kept, so memory stays bounded for long runs.

use std::collections::{BTreeMap, VecDeque};

use super::{ClusterHit, PhotonEvent, Port};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug)]
struct Acc {
    port: Port,
    sum_x: f64,
    sum_y: f64,
    n: usize,
    t_min: f64,
    t_last: f64,
}

impl Acc {
    fn hit(&self) -> ClusterHit {
        ClusterHit {
            port: self.port,
            cx: self.sum_x / self.n as f64,
            cy: self.sum_y / self.n as f64,
            t: self.t_min,
            n_pixels: self.n,
        }
    }
}

pub struct Clusterer {
    gap_px: f64,
    gap_ns: f64,
    window: VecDeque<(PhotonEvent, u64)>,
    open: BTreeMap<u64, Acc>,
    next_id: u64,
    pushed: usize,
    last_t: f64,
    done: Vec<ClusterHit>,
}

impl Clusterer {
    pub fn new(gap_px: f64, gap_ns: f64) -> Self {
        Self {
            gap_px,
            gap_ns,
            window: VecDeque::new(),
            open: BTreeMap::new(),
            next_id: 0,
            pushed: 0,
            last_t: f64::NEG_INFINITY,
            done: Vec::new(),
        }
    }

    /// Adds the next event; events must arrive in non-decreasing time.
    pub fn push(&mut self, ev: PhotonEvent) -> Result<()> {
        if ev.t < self.last_t || ev.t.is_nan() {
            return Err(Error::Unsorted(self.pushed));
        }
        self.pushed += 1;
        self.last_t = ev.t;

        let horizon = ev.t - self.gap_ns;
        while self.window.front().is_some_and(|(e, _)| e.t < horizon) {
            self.window.pop_front();
        }
        let closed: Vec<u64> = self
            .open
            .iter()
            .filter(|(_, a)| a.t_last < horizon)
            .map(|(&id, _)| id)
            .collect();
        for id in closed {
            let acc = self.open.remove(&id).expect("listed");
            self.done.push(acc.hit());
        }

        let gap2 = self.gap_px * self.gap_px;
        let mut linked: Vec<u64> = self
            .window
            .iter()
            .filter(|(e, _)| {
                e.port == ev.port && {
                    let (dx, dy) = (e.x - ev.x, e.y - ev.y);
                    dx * dx + dy * dy <= gap2
                }
            })
            .map(|&(_, id)| id)
            .collect();
        linked.sort_unstable();
        linked.dedup();

        let id = match linked.first() {
            Some(&target) => {
                for &other in &linked[1..] {
                    let a = self.open.remove(&other).expect("open cluster");
                    let t = self.open.get_mut(&target).expect("open cluster");
                    t.sum_x += a.sum_x;
                    t.sum_y += a.sum_y;
                    t.n += a.n;
                    t.t_min = t.t_min.min(a.t_min);
                    t.t_last = t.t_last.max(a.t_last);
                    for (_, cid) in self.window.iter_mut() {
                        if *cid == other {
                            *cid = target;
                        }
                    }
                }
                let t = self.open.get_mut(&target).expect("open cluster");
                t.sum_x += ev.x;
                t.sum_y += ev.y;
                t.n += 1;
                t.t_last = ev.t;
                target
            }
            None => {
                let id = self.next_id;
                self.next_id += 1;
                self.open.insert(
                    id,
                    Acc {
                        port: ev.port,
                        sum_x: ev.x,
                        sum_y: ev.y,
                        n: 1,
                        t_min: ev.t,
                        t_last: ev.t,
                    },
                );
                id
            }
        };
        self.window.push_back((ev, id));
        Ok(())
    }

    /// Closes all clusters and returns the hits sorted by time.
    pub fn finish(mut self) -> Vec<ClusterHit> {
        let rest: Vec<Acc> = self.open.values().copied().collect();
        self.done.extend(rest.iter().map(Acc::hit));
        self.done.sort_by(|a, b| {
            a.t.total_cmp(&b.t)
                .then(a.port.cmp(&b.port))
                .then(a.cx.total_cmp(&b.cx))
                .then(a.cy.total_cmp(&b.cy))
        });
        self.done
    }
}

/// Clusters a time-sorted slice of events.
pub fn cluster(events: &[PhotonEvent], gap_px: f64, gap_ns: f64) -> Result<Vec<ClusterHit>> {
    let mut c = Clusterer::new(gap_px, gap_ns);
    for &ev in events {
        c.push(ev)?;
    }
    Ok(c.finish())
}
