//! Traffic, route discovery and data forwarding.

use super::node::Discovery;
use super::{Ev, Role, World};
use crate::adversary::ForwardDecision;
use crate::kernel::SimTime;
use crate::protocol::{Data, NodeId, Packet, Rrep, Rreq};
use crate::routing::{reply_flags, select_reply, ReplyCandidate, RouteEntry};
use crate::trace::TraceRecord;

impl World {
    fn route_expiry(&self) -> SimTime {
        self.now() + SimTime::from_secs_f64(self.cfg.routing.route_expiry_s)
    }

    /// True if `n` takes routing or data traffic from `from`.
    fn accepts_from(&self, n: NodeId, from: NodeId) -> bool {
        let node = &self.nodes[n.index()];
        !self.defense() || (node.matrix.is_valid(from) && !node.quarantine.contains(from))
    }

    /// Next hop towards `dst` if the route is live and, with the defense on,
    /// goes through a valid neighbor.
    fn usable_route(&self, n: NodeId, dst: NodeId) -> Option<NodeId> {
        let node = &self.nodes[n.index()];
        let e = node.routes.lookup(dst, self.now())?;
        if self.defense() && (!node.matrix.is_valid(e.next_hop) || node.quarantine.contains(e.next_hop)) {
            return None;
        }
        Some(e.next_hop)
    }

    fn install_route(&mut self, n: NodeId, e: RouteEntry, fresher_only: bool) -> bool {
        let now = self.now();
        let defense = self.defense();
        let node = &mut self.nodes[n.index()];
        if node.quarantine.contains(e.next_hop) || node.quarantine.contains(e.dst) {
            self.stats.route_violations += 1;
            return false;
        }
        let changed = if !fresher_only {
            node.routes.install(e);
            true
        } else if defense {
            node.routes.offer_trusted(e, &node.matrix, now).unwrap_or(false)
        } else {
            node.routes.offer(e, now)
        };
        if changed {
            let t = now.as_micros();
            self.trace.push(|| TraceRecord::RouteInstall {
                t,
                node: n,
                dst: e.dst,
                next_hop: e.next_hop,
                seq: e.seq_no,
                hops: e.hop_count,
            });
        }
        changed
    }

    pub(crate) fn drop_data(&mut self, n: NodeId, uid: u64, reason: &str) {
        let t = self.t();
        self.trace.push(|| TraceRecord::Drop {
            t,
            uid,
            node: n,
            reason: reason.to_string(),
        });
    }

    pub(crate) fn on_traffic(&mut self, flow: usize) {
        let (src, dst) = self.flows[flow];
        let period = SimTime::from_secs_f64(1.0 / self.cfg.traffic.rate_pps);
        if self.now() + period < self.end {
            self.after(period, Ev::Traffic { flow });
        }
        if !self.nodes[src.index()].alive() {
            return;
        }
        let uid = self.next_uid;
        self.next_uid += 1;
        self.stats.sent += 1;
        let t = self.t();
        self.trace.push(|| TraceRecord::Gen { t, uid, src, dst });
        let data = Data {
            uid,
            src,
            dst,
            payload_bytes: self.cfg.traffic.packet_bytes,
            route: Vec::new(),
        };
        self.send_data(src, data);
    }

    /// Sends or buffers a packet that `n` originates or relays.
    pub(crate) fn send_data(&mut self, n: NodeId, mut data: Data) {
        if self.nodes[n.index()].quarantine.contains(data.dst) {
            self.drop_data(n, data.uid, "quarantined_dst");
            return;
        }
        if let Some(next) = self.usable_route(n, data.dst) {
            data.route.push(n);
            self.unicast(n, next, Packet::Data(data), None);
            return;
        }
        let cap = self.cfg.routing.buffer_cap;
        let node = &mut self.nodes[n.index()];
        let dst = data.dst;
        let q = node.buffer.entry(dst).or_default();
        if q.len() >= cap {
            let uid = data.uid;
            self.drop_data(n, uid, "buffer_full");
            return;
        }
        q.push_back(data);
        if !node.discoveries.contains_key(&dst) {
            node.routes.invalidate(dst);
            self.start_discovery(n, dst, 1);
        }
    }

    fn start_discovery(&mut self, n: NodeId, dst: NodeId, attempt: u8) {
        let node = &mut self.nodes[n.index()];
        let request_id = node.next_request;
        node.next_request = node.next_request.wrapping_add(1);
        node.rreq_cache.first_time(n, request_id);
        node.discoveries.insert(
            dst,
            Discovery {
                request_id,
                attempt,
                cands: Vec::new(),
                observed: Vec::new(),
            },
        );
        let seq_no = node.known_seq.get(&dst).copied().unwrap_or(0);
        self.broadcast(
            n,
            Packet::Rreq(Rreq {
                src: n,
                dst,
                request_id,
                seq_no,
                hop_count: 0,
            }),
        );
        let window = SimTime::from_secs_f64(self.cfg.routing.reply_window_ms / 1000.0);
        self.after(window, Ev::RouteWindow { node: n, dst, request_id });
    }

    pub(crate) fn on_rreq(&mut self, me: NodeId, from: NodeId, r: Rreq) {
        if r.src == me {
            return;
        }
        if let Role::Adversary(p) = self.nodes[me.index()].role {
            let node = &mut self.nodes[me.index()];
            if node.rreq_cache.first_time(r.src, r.request_id) {
                if let Some(rep) = p.reply(me, &r, &mut node.rng) {
                    self.unicast(me, from, Packet::Rrep(rep), None);
                }
            }
            return;
        }
        if !self.accepts_from(me, from) || self.nodes[me.index()].quarantine.contains(r.src) {
            return;
        }
        if !self.nodes[me.index()].rreq_cache.first_time(r.src, r.request_id) {
            return;
        }
        let hops = r.hop_count.saturating_add(1);
        let reverse = RouteEntry {
            dst: r.src,
            next_hop: from,
            seq_no: 0,
            hop_count: hops,
            expiry: self.route_expiry(),
        };
        self.install_route(me, reverse, false);
        if r.dst == me {
            let node = &mut self.nodes[me.index()];
            node.seq_no = node.seq_no.max(r.seq_no).saturating_add(1);
            let rep = Rrep {
                src: me,
                dst: r.src,
                target: me,
                request_id: r.request_id,
                seq_no: node.seq_no,
                hop_count: 0,
            };
            self.unicast(me, from, Packet::Rrep(rep), None);
        } else {
            self.broadcast(me, Packet::Rreq(Rreq { hop_count: hops, ..r }));
        }
    }

    pub(crate) fn on_rrep(&mut self, me: NodeId, from: NodeId, r: Rrep) {
        let honest = self.nodes[me.index()].role.is_honest();
        // Attackers never relay replies, but they do use replies to their
        // own discoveries when they pass traffic on.
        if !honest && r.dst != me {
            return;
        }
        let now = self.now();
        if honest && self.defense() && from == r.src {
            self.nodes[me.index()].window.record(from, |c| {
                c.rrep_sent += 1;
                c.last_rrep_seq = r.seq_no;
                c.last_rrep_hops = r.hop_count;
            });
        }
        let trusted = !honest || (self.accepts_from(me, from) && !self.nodes[me.index()].quarantine.contains(r.src));
        let hops = r.hop_count.saturating_add(1);
        if r.dst == me {
            let node = &mut self.nodes[me.index()];
            if let Some(d) = node.discoveries.get_mut(&r.target).filter(|d| d.request_id == r.request_id) {
                let c = ReplyCandidate {
                    replier: r.src,
                    next_hop: from,
                    seq_no: r.seq_no,
                    hop_count: hops,
                    arrival: now,
                };
                d.observed.push(c);
                if trusted {
                    d.cands.push(c);
                }
            }
            return;
        }
        if !trusted {
            return;
        }
        let fwd = RouteEntry {
            dst: r.target,
            next_hop: from,
            seq_no: r.seq_no,
            hop_count: hops,
            expiry: self.route_expiry(),
        };
        self.install_route(me, fwd, true);
        if let Some(next) = self.usable_route(me, r.dst) {
            self.unicast(me, next, Packet::Rrep(Rrep { hop_count: hops, ..r }), None);
        }
    }

    pub(crate) fn on_route_window(&mut self, n: NodeId, dst: NodeId, request_id: u32) {
        let defense = self.defense();
        let margin = SimTime::from_secs_f64(self.cfg.detector.earliest_margin_ms / 1000.0);
        let node = &mut self.nodes[n.index()];
        if !node.discoveries.get(&dst).is_some_and(|d| d.request_id == request_id) {
            return;
        }
        let d = node.discoveries.remove(&dst).expect("checked above");
        if !node.alive() {
            return;
        }
        if defense {
            let direct: Vec<ReplyCandidate> = d.observed.iter().filter(|c| c.replier == c.next_hop).copied().collect();
            for (replier, f) in reply_flags(&d.observed, margin) {
                if !direct.iter().any(|c| c.replier == replier) || !(f.earliest || f.max_seq_min_hop) {
                    continue;
                }
                node.window.record(replier, |c| {
                    c.earliest_rrep_flag |= f.earliest;
                    c.max_seq_min_hop_flag |= f.max_seq_min_hop;
                });
            }
        }
        if let Some(best) = select_reply(&d.cands).copied() {
            let e = RouteEntry {
                dst,
                next_hop: best.next_hop,
                seq_no: best.seq_no,
                hop_count: best.hop_count,
                expiry: self.route_expiry(),
            };
            let node = &mut self.nodes[n.index()];
            let ks = node.known_seq.entry(dst).or_insert(0);
            *ks = (*ks).max(best.seq_no);
            self.install_route(n, e, false);
            let queued = self.nodes[n.index()].buffer.remove(&dst).unwrap_or_default();
            for data in queued {
                self.send_data(n, data);
            }
        } else if d.attempt < self.cfg.routing.max_discovery_attempts {
            self.start_discovery(n, dst, d.attempt + 1);
        } else {
            let queued = self.nodes[n.index()].buffer.remove(&dst).unwrap_or_default();
            for data in queued {
                self.drop_data(n, data.uid, "no_route");
            }
        }
    }

    pub(crate) fn on_data(&mut self, me: NodeId, from: NodeId, data: Data) {
        let delay = self.radio.per_hop_delay;
        if let Role::Adversary(p) = self.nodes[me.index()].role {
            self.note_handover(from, me, &data);
            let node = &mut self.nodes[me.index()];
            match p.forward(&mut node.rng) {
                ForwardDecision::Drop => self.drop_data(me, data.uid, p.kind.name()),
                ForwardDecision::Forward => self.send_data(me, data),
            }
            return;
        }
        if !self.accepts_from(me, from) {
            self.after(delay, Ev::LinkFail { node: from, next: me, data });
            return;
        }
        self.note_handover(from, me, &data);
        if data.dst == me {
            if self.nodes[me.index()].delivered.insert(data.uid) {
                self.stats.delivered += 1;
                let t = self.t();
                let hops = data.route.len() as u32;
                self.trace.push(|| TraceRecord::Deliver { t, uid: data.uid, dst: me, hops });
            }
            return;
        }
        if data.route.contains(&me) {
            self.drop_data(me, data.uid, "loop");
            return;
        }
        self.send_data(me, data);
    }

    /// The sender learns that `to` took the packet and starts watching for
    /// the onward transmission.
    fn note_handover(&mut self, from: NodeId, to: NodeId, data: &Data) {
        if !self.defense() || data.dst == to {
            return;
        }
        let now = self.now();
        let node = &mut self.nodes[from.index()];
        if !node.role.is_honest() {
            return;
        }
        node.window.record(to, |c| c.data_received += 1);
        node.watch.entry(to).or_default().insert(data.uid, now);
    }

    pub(crate) fn on_link_fail(&mut self, n: NodeId, next: NodeId, mut data: Data) {
        if !self.nodes[n.index()].alive() {
            return;
        }
        let max = self.cfg.routing.max_reroutes;
        let node = &mut self.nodes[n.index()];
        node.routes.drop_next_hop(next);
        let tries = node.reroutes.entry(data.uid).or_insert(0);
        *tries += 1;
        if *tries > max {
            self.drop_data(n, data.uid, "link_fail");
            return;
        }
        if data.route.last() == Some(&n) {
            data.route.pop();
        }
        self.send_data(n, data);
    }
}
