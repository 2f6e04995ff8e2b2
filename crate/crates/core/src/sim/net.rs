//! Radio transmission, neighbor discovery, Confidence, Death and Control.

use rand::Rng;

use super::{AgentBody, Ev, Role, World};
use crate::agent::select_handoff;
use crate::crypto::{check_auth, make_auth};
use crate::kernel::{ChargeOutcome, SimTime};
use crate::protocol::{wire_len, Confidence, ControlKind, Eviction, NodeId, Packet, TrustTuple};
use crate::trace::TraceRecord;

impl World {
    pub(crate) fn defense(&self) -> bool {
        self.cfg.scenario.defense
    }

    /// Live nodes within radio range of `a`, in id order.
    pub(crate) fn hearers(&self, a: NodeId) -> Vec<NodeId> {
        let pos = self.mobility.positions();
        let pa = pos[a.index()];
        self.nodes
            .iter()
            .filter(|n| n.id != a && n.alive() && self.radio.in_range(&pa, &pos[n.id.index()]))
            .map(|n| n.id)
            .collect()
    }

    pub(crate) fn rss(&self, a: NodeId, b: NodeId) -> f64 {
        let pos = self.mobility.positions();
        self.radio.rss(&pos[a.index()], &pos[b.index()])
    }

    /// Charges `cost` to `n`. Returns false if the node is now dead.
    fn charge(&mut self, n: NodeId, cost: u64) -> bool {
        match self.nodes[n.index()].energy.charge(cost) {
            ChargeOutcome::Charged => true,
            ChargeOutcome::Died => {
                self.on_node_died(n);
                false
            }
            ChargeOutcome::AlreadyDead => false,
        }
    }

    pub(crate) fn unicast(&mut self, from: NodeId, to: NodeId, pkt: Packet, body: Option<Box<AgentBody>>) {
        if !self.nodes[from.index()].alive() {
            return;
        }
        let hearers = self.hearers(from);
        if let Packet::Data(d) = &pkt {
            self.overhear_data(from, d.uid, &hearers);
        }
        let cost = self.radio.tx.cost(wire_len(&pkt, &self.fmt));
        let delay = self.radio.per_hop_delay;
        if hearers.contains(&to) {
            self.after(delay, Ev::Deliver { to, from, pkt, body });
        } else if let Packet::Data(data) = pkt {
            self.after(delay, Ev::LinkFail { node: from, next: to, data });
        }
        self.charge(from, cost);
    }

    pub(crate) fn broadcast(&mut self, from: NodeId, pkt: Packet) {
        if !self.nodes[from.index()].alive() {
            return;
        }
        let cost = self.radio.tx.cost(wire_len(&pkt, &self.fmt));
        self.broadcast_free(from, pkt);
        self.charge(from, cost);
    }

    /// Broadcast without charging the sender.
    fn broadcast_free(&mut self, from: NodeId, pkt: Packet) {
        let delay = self.radio.per_hop_delay;
        for to in self.hearers(from) {
            self.after(
                delay,
                Ev::Deliver {
                    to,
                    from,
                    pkt: pkt.clone(),
                    body: None,
                },
            );
        }
    }

    /// Watchdog bookkeeping at every node that overhears a data transmission.
    fn overhear_data(&mut self, sender: NodeId, uid: u64, hearers: &[NodeId]) {
        if !self.defense() {
            return;
        }
        for h in hearers {
            let node = &mut self.nodes[h.index()];
            if !node.role.is_honest() {
                continue;
            }
            let forwarded = node.watch.get_mut(&sender).is_some_and(|w| w.remove(&uid).is_some());
            node.window.record(sender, |c| {
                c.data_sent += 1;
                if forwarded {
                    c.data_forwarded += 1;
                }
            });
        }
    }

    pub(crate) fn on_deliver(&mut self, to: NodeId, from: NodeId, pkt: Packet, body: Option<Box<AgentBody>>) {
        if !self.nodes[to.index()].alive() {
            return;
        }
        let cost = self.radio.rx.cost(wire_len(&pkt, &self.fmt));
        if !self.charge(to, cost) {
            return;
        }
        self.sense(to, from);
        match pkt {
            Packet::Hello { .. } => {}
            Packet::Rreq(r) => self.on_rreq(to, from, r),
            Packet::Rrep(r) => self.on_rrep(to, from, r),
            Packet::Data(d) => self.on_data(to, from, d),
            Packet::Agent(p) => self.on_agent_packet(to, from, p, body),
            Packet::Confidence(c) => self.on_confidence(to, c),
            Packet::CommentRequest { src, subject } => self.on_comment_request(to, src, subject),
            Packet::CommentReply { src, subject, counters } => self.on_comment_reply(to, src, subject, counters),
            Packet::Warning { src, subject, tag } => self.on_warning(to, src, subject, tag),
            Packet::Death { src } => self.on_death_packet(to, src),
            Packet::Control {
                kind: ControlKind::RediscoverNeighbors,
                ..
            } => self.broadcast(to, Packet::Hello { src: to }),
        }
    }

    pub(crate) fn on_hello_timer(&mut self, n: NodeId) {
        if !self.nodes[n.index()].alive() {
            return;
        }
        let now = self.now();
        let period = SimTime::from_secs_f64(self.cfg.protocol.hello_period_s);
        let max_age = SimTime::from_secs_f64(self.cfg.protocol.hello_period_s * self.cfg.protocol.entry_max_age_periods);
        let threshold = self.cfg.protocol.rss_threshold;
        let ids = self.nodes[n.index()].matrix.ids();
        let rss: Vec<(NodeId, f64)> = ids.iter().map(|m| (*m, self.rss(n, *m))).collect();
        let node = &mut self.nodes[n.index()];
        node.matrix.expire(now, max_age);
        node.routes.expire(now);
        let hosts_agent = node.is_agent_node();
        let mut control = false;
        for (m, r) in rss {
            if node.matrix.contains(m) && node.matrix.evict_weak(m, r, threshold, hosts_agent) == Eviction::EvictedWithControl {
                control = true;
            }
        }
        node.last_hello_sent = Some(now);
        self.broadcast(n, Packet::Hello { src: n });
        if control {
            self.broadcast(
                n,
                Packet::Control {
                    src: n,
                    kind: ControlKind::RediscoverNeighbors,
                },
            );
        }
        self.after(period, Ev::Hello { node: n });
    }

    /// Any frame heard from a neighbor admits or refreshes its matrix entry.
    /// New entries start untrusted unless a verified memory of them exists.
    fn sense(&mut self, me: NodeId, src: NodeId) {
        let now = self.now();
        if self.nodes[me.index()].matrix.is_banned(src) {
            return;
        }
        let fresh = !self.nodes[me.index()].matrix.contains(src);
        if fresh && self.defense() && self.cfg.protocol.authenticate_neighbors && !self.authenticate(src, me) {
            return;
        }
        let rss = self.rss(me, src);
        let remember = self.cfg.protocol.remember_trust;
        let node = &mut self.nodes[me.index()];
        node.last_hello.insert(src, now);
        if node.matrix.process_hello(src, rss, now) && remember {
            if let Some(&(v, a)) = node.trust_memory.get(&src) {
                let _ = node.matrix.set_trust(src, v, a);
            }
        }
    }

    /// Pairwise check between a new neighbor and the receiver, both sides
    /// using keys issued by the authority.
    fn authenticate(&mut self, sender: NodeId, receiver: NodeId) -> bool {
        let now = self.now();
        let window = SimTime::from_secs_f64(self.cfg.protocol.freshness_window_s);
        let s = &self.nodes[sender.index()].keys;
        let r = &self.nodes[receiver.index()].keys;
        let msg = make_auth(&self.group, s, r.public, self.ta_public, &mut self.rng, now);
        check_auth(
            &self.group,
            r,
            self.signed_ids[sender.index()],
            s.public,
            self.ta_public,
            &msg,
            now,
            window,
        )
        .is_ok()
    }

    fn on_confidence(&mut self, me: NodeId, c: Confidence) {
        let node = &mut self.nodes[me.index()];
        if !node.role.is_honest() || !node.matrix.is_valid(c.src) || node.quarantine.contains(c.src) {
            return;
        }
        let remember = self.cfg.protocol.remember_trust;
        for t in &c.trusted {
            if t.node == me || node.quarantine.contains(t.node) {
                continue;
            }
            if node.matrix.contains(t.node) {
                node.set_bits(t.node, t.valid, t.agent);
            } else if remember {
                node.trust_memory.insert(t.node, (t.valid, t.agent));
            }
        }
    }

    /// Confidence packet listing the sender and its valid neighbors. A
    /// lying agent node vouches for everyone it knows.
    pub(crate) fn send_confidence(&mut self, home: NodeId) {
        let node = &self.nodes[home.index()];
        let trusted = match node.role {
            Role::Adversary(p) if p.false_confidence => {
                let mut v = vec![TrustTuple {
                    node: home,
                    valid: true,
                    agent: true,
                }];
                v.extend(node.matrix.ids().into_iter().map(|n| TrustTuple {
                    node: n,
                    valid: true,
                    agent: false,
                }));
                v
            }
            _ => {
                let mut v = node.matrix.confidence_tuples(home);
                if self.cfg.protocol.remember_trust {
                    // Also vouch for nodes verified earlier that are out of range now.
                    v.extend(
                        node.trust_memory
                            .iter()
                            .filter(|(n, bits)| bits.0 && **n != home && !node.matrix.contains(**n) && !node.quarantine.contains(**n))
                            .map(|(n, (valid, agent))| TrustTuple {
                                node: *n,
                                valid: *valid,
                                agent: *agent,
                            }),
                    );
                }
                v
            }
        };
        self.broadcast(home, Packet::Confidence(Confidence { src: home, trusted }));
    }

    fn on_death_packet(&mut self, me: NodeId, src: NodeId) {
        let node = &mut self.nodes[me.index()];
        node.matrix.remove(src);
        node.trust_memory.remove(&src);
        node.routes.purge_node(src);
        node.watch.remove(&src);
        if let Some(a) = node.agent.as_mut() {
            a.state.skip(src);
        }
    }

    pub(crate) fn on_node_died(&mut self, n: NodeId) {
        let t = self.t();
        self.stats.deaths += 1;
        self.trace.push(|| TraceRecord::Death { t, node: n });
        if let Some(mut agent) = self.nodes[n.index()].agent.take() {
            let target = select_handoff(&self.nodes[n.index()].matrix)
                .filter(|c| self.nodes[c.index()].alive() && self.nodes[c.index()].agent.is_none());
            self.trace.push(|| TraceRecord::Handoff { t, from: n, to: target });
            if let Some(to) = target {
                agent.state = crate::agent::SmartAgent::new(to);
                agent.pending_warnings.clear();
                self.nodes[to.index()].agent = Some(agent);
                let d = self.radio.per_hop_delay + SimTime::from_millis(self.rng.gen_range(1..=1000));
                self.after(d, Ev::AgentCycle { node: to });
            }
        }
        self.broadcast_free(n, Packet::Death { src: n });
    }
}
