//! Agent cycles, migration, the confidence exchange and fake agents.

use rand::Rng;

use super::node::HostVisit;
use super::{AgentBody, Ev, Leg, Role, World};
use crate::adversary::inject_fake_agent;
use crate::agent::{confidence_handshake, resolve_arrivals, AgentIdentity, HostCredentials, TimeoutAction, TrustOutcome, VisitResult};
use crate::crypto::{mask_data, unmask_data, CodeWord, DataBits};
use crate::kernel::SimTime;
use crate::protocol::{AgentPacket, NodeId, Packet};
use crate::trace::TraceRecord;

impl World {
    fn kit_of(&self, home: NodeId) -> Option<crate::crypto::AgentKit> {
        match &self.nodes[home.index()].agent.as_ref()?.identity {
            AgentIdentity::Genuine(k) => Some(k.clone()),
            AgentIdentity::Fake(_) => None,
        }
    }

    fn agent_cycle_matches(&self, home: NodeId, cycle: u64) -> bool {
        let node = &self.nodes[home.index()];
        node.alive() && node.agent.as_ref().is_some_and(|a| a.state.cycle == cycle)
    }

    fn schedule_next_cycle(&mut self, home: NodeId) {
        let node = &mut self.nodes[home.index()];
        let d = self.cfg.agents.next_period(&mut node.rng);
        self.after(d, Ev::AgentCycle { node: home });
    }

    pub(crate) fn on_agent_cycle(&mut self, home: NodeId) {
        let node = &mut self.nodes[home.index()];
        if !node.alive() {
            return;
        }
        let neighbors = node.matrix.ids();
        let Some(agent) = node.agent.as_mut() else {
            return;
        };
        if agent.state.in_cycle() {
            return;
        }
        let first = agent.state.begin_cycle(neighbors);
        let cycle = agent.state.cycle;
        match first {
            Some(n) => self.depart(home, n, 1, cycle),
            None => self.schedule_next_cycle(home),
        }
    }

    fn depart(&mut self, home: NodeId, n: NodeId, attempt: u8, cycle: u64) {
        let now = self.now();
        if !self.nodes[home.index()].matrix.contains(n) {
            let next = self.nodes[home.index()]
                .agent
                .as_mut()
                .and_then(|a| a.state.finish_visit(n, VisitResult::Lost));
            self.advance(home, next, cycle);
            return;
        }
        let Some(kit) = self.kit_of(home) else {
            return;
        };
        let agent = self.nodes[home.index()].agent.as_mut().expect("kit implies agent");
        agent.state.depart(n, now, attempt);
        if attempt == 1 {
            agent.first_departure = now;
        }
        let identity = agent.identity.clone();
        let own = DataBits::from_flags(self.fmt.data_width, true, true).expect("width validated");
        let pkt = AgentPacket {
            src_uav: home,
            dst_uav: n,
            code3: CodeWord::zero(self.fmt.code_width),
            hash_output: CodeWord::zero(self.fmt.code_width),
            data_code: DataBits::new(self.fmt.data_width, 0).expect("width validated"),
            data: mask_data(&kit.data_code, &own).expect("same width"),
        }
        .sealed();
        let body = AgentBody {
            identity,
            home,
            cycle,
            leg: Leg::Outbound,
        };
        self.unicast(home, n, Packet::Agent(pkt), Some(Box::new(body)));
        self.after(
            self.cfg.agents.timeout(),
            Ev::MigrationTimeout {
                home,
                neighbor: n,
                attempt,
                cycle,
            },
        );
    }

    /// Moves on to `next`, or closes the cycle.
    fn advance(&mut self, home: NodeId, next: Option<NodeId>, cycle: u64) {
        match next {
            Some(n) => self.depart(home, n, 1, cycle),
            None => self.after(SimTime::from_millis(1), Ev::CycleEnd { home, cycle }),
        }
    }

    pub(crate) fn on_agent_packet(&mut self, me: NodeId, from: NodeId, pkt: AgentPacket, body: Option<Box<AgentBody>>) {
        let Some(body) = body else {
            return;
        };
        if !pkt.integrity_ok() || pkt.dst_uav != me {
            return;
        }
        match body.leg {
            Leg::Outbound => self.on_agent_arrival(me, from, pkt, *body),
            Leg::Return(outcome) => self.on_agent_return(me, from, pkt, *body, outcome),
        }
    }

    fn on_agent_arrival(&mut self, me: NodeId, from: NodeId, pkt: AgentPacket, body: AgentBody) {
        let now = self.now();
        let t = now.as_micros();
        if let Role::Adversary(p) = self.nodes[me.index()].role {
            if p.captures_agents && body.identity.is_genuine() {
                return;
            }
        }
        if let Some(cur) = &self.nodes[me.index()].hosting {
            let keep = resolve_arrivals(&[(cur.arrival, cur.body.home), (now, body.home)]);
            let (ignored_home, replace) = if keep == Some(body.home) {
                (cur.body.home, true)
            } else {
                (body.home, false)
            };
            self.trace.push(|| TraceRecord::AgentIgnored {
                t,
                host: me,
                home: ignored_home,
            });
            if !replace {
                return;
            }
        }
        let hs = self.next_hs;
        self.next_hs += 1;
        self.nodes[me.index()].hosting = Some(HostVisit {
            from,
            arrival: now,
            pkt,
            body,
            hs,
        });
        let d = SimTime::from_secs_f64(self.cfg.agents.handshake_ms / 1000.0);
        self.after(d, Ev::HandshakeDone { host: me, hs });
    }

    pub(crate) fn on_handshake_done(&mut self, me: NodeId, hs: u64) {
        let node = &mut self.nodes[me.index()];
        if !node.hosting.as_ref().is_some_and(|v| v.hs == hs) {
            return;
        }
        let visit = node.hosting.take().expect("checked above");
        if !node.alive() {
            return;
        }
        let nonce = self.rng.gen::<u64>();
        let node = &self.nodes[me.index()];
        let hand = confidence_handshake(&visit.body.identity, &node.creds, nonce);
        let t = self.t();
        let home = visit.body.home;
        for s in &hand.steps {
            self.trace.push(|| TraceRecord::Handshake {
                t,
                hs,
                home,
                host: me,
                step: s.step,
                ok: s.ok,
            });
        }
        self.trace.push(|| TraceRecord::HandshakeResult {
            t,
            hs,
            home,
            host: me,
            outcome: hand.outcome,
        });
        self.stats.handshakes += 1;
        let hosts_agent = self.nodes[me.index()].is_agent_node();
        let node = &mut self.nodes[me.index()];
        let mutual = hand.outcome == TrustOutcome::MutualTrust;
        if let (Some(code), HostCredentials::Provisioned(_)) = (hand.data_code, &node.creds) {
            if let Ok(bits) = unmask_data(&code, &visit.pkt.data) {
                node.set_bits(visit.from, bits.valid_bit(), bits.agent_bit());
            }
        }
        let kit = match &visit.body.identity {
            AgentIdentity::Genuine(k) => k.clone(),
            AgentIdentity::Fake(_) => {
                if node.role.is_honest() {
                    node.set_bits(visit.from, false, false);
                }
                return;
            }
        };
        let report = DataBits::from_flags(self.fmt.data_width, mutual, mutual && hosts_agent).expect("width validated");
        let pkt = AgentPacket {
            src_uav: me,
            dst_uav: home,
            code3: if mutual {
                kit.code3_expected.clone()
            } else {
                CodeWord::zero(self.fmt.code_width)
            },
            hash_output: CodeWord::zero(self.fmt.code_width),
            data_code: DataBits::new(self.fmt.data_width, 0).expect("width validated"),
            data: mask_data(&kit.data_code, &report).expect("same width"),
        }
        .sealed();
        let body = AgentBody {
            leg: Leg::Return(hand.outcome),
            ..visit.body
        };
        self.unicast(me, visit.from, Packet::Agent(pkt), Some(Box::new(body)));
    }

    fn on_agent_return(&mut self, me: NodeId, from: NodeId, pkt: AgentPacket, body: AgentBody, outcome: TrustOutcome) {
        if body.home != me || !self.agent_cycle_matches(me, body.cycle) {
            return;
        }
        let Some(kit) = self.kit_of(me) else {
            return;
        };
        let t = self.now().as_micros();
        let node = &mut self.nodes[me.index()];
        let agent = node.agent.as_mut().expect("cycle matched");
        if agent.state.visiting().map(|(n, _)| n) != Some(from) {
            return;
        }
        self.trace.push(|| TraceRecord::AgentReturn {
            t,
            home: me,
            host: from,
            outcome,
        });
        let bits = unmask_data(&kit.data_code, &pkt.data).expect("same width");
        match outcome {
            TrustOutcome::MutualTrust => node.set_bits(from, bits.valid_bit(), bits.agent_bit()),
            TrustOutcome::AgentRejectsNode => {
                node.set_bits(from, false, false);
                agent_mut(node).pending_warnings.push((from, "agent_rejected"));
            }
            TrustOutcome::NodeRejectsAgent => node.set_bits(from, false, false),
        }
        let next = agent_mut(node).state.finish_visit(from, VisitResult::Returned(outcome));
        self.advance(me, next, body.cycle);
    }

    pub(crate) fn on_migration_timeout(&mut self, home: NodeId, n: NodeId, attempt: u8, cycle: u64) {
        if !self.agent_cycle_matches(home, cycle) {
            return;
        }
        let max = self.cfg.agents.max_attempts;
        let node = &mut self.nodes[home.index()];
        let action = agent_mut(node).state.on_timeout(n, attempt, max);
        let t = self.now().as_micros();
        let name = match action {
            TimeoutAction::Stale => return,
            TimeoutAction::Retry { .. } => "retry",
            TimeoutAction::GiveUp => "give_up",
        };
        self.trace.push(|| TraceRecord::AgentTimeout {
            t,
            home,
            neighbor: n,
            attempt,
            action: name.to_string(),
        });
        match action {
            TimeoutAction::Retry { attempt: next } => {
                let node = &mut self.nodes[home.index()];
                let d = self.cfg.agents.backoff(&mut node.rng);
                self.after(
                    d,
                    Ev::MigrationRetry {
                        home,
                        neighbor: n,
                        attempt: next,
                        cycle,
                    },
                );
            }
            TimeoutAction::GiveUp => {
                self.stats.agents_lost += 1;
                let node = &mut self.nodes[home.index()];
                let since = agent_mut(node).first_departure;
                // Only a neighbor still heard from is blamed; one that left
                // range is just dropped.
                if node.last_hello.get(&n).is_some_and(|h| *h > since) {
                    node.set_bits(n, false, false);
                    agent_mut(node).pending_warnings.push((n, "agent_lost"));
                } else {
                    node.matrix.remove(n);
                }
                let next = agent_mut(node).state.finish_visit(n, VisitResult::Lost);
                self.advance(home, next, cycle);
            }
            TimeoutAction::Stale => {}
        }
    }

    pub(crate) fn on_migration_retry(&mut self, home: NodeId, n: NodeId, attempt: u8, cycle: u64) {
        if !self.agent_cycle_matches(home, cycle) {
            return;
        }
        let node = &self.nodes[home.index()];
        let visiting = node.agent.as_ref().and_then(|a| a.state.visiting());
        if visiting != Some((n, attempt - 1)) {
            return;
        }
        self.depart(home, n, attempt, cycle);
    }

    pub(crate) fn on_cycle_end(&mut self, home: NodeId, cycle: u64) {
        if !self.agent_cycle_matches(home, cycle) {
            return;
        }
        let node = &mut self.nodes[home.index()];
        let agent = agent_mut(node);
        if agent.state.in_cycle() {
            return;
        }
        let pending = std::mem::take(&mut agent.pending_warnings);
        for (n, reason) in pending {
            self.issue_warning(home, n, reason);
        }
        let t = self.t();
        self.trace.push(|| TraceRecord::CycleEnd { t, home, cycle });
        self.send_confidence(home);
        self.schedule_next_cycle(home);
    }

    pub(crate) fn on_fake_agent(&mut self, me: NodeId) {
        let node = &mut self.nodes[me.index()];
        if !node.alive() {
            return;
        }
        let interval = SimTime::from_secs_f64(self.cfg.adversary.fake_agent_interval_s);
        let ids = node.matrix.ids();
        if let (false, HostCredentials::Enemy(kit)) = (ids.is_empty(), &node.creds) {
            let kit = kit.clone();
            let target = ids[node.rng.gen_range(0..ids.len())];
            let pkt = inject_fake_agent(me, target, &self.fmt, &mut node.rng);
            let body = AgentBody {
                identity: AgentIdentity::Fake(kit),
                home: me,
                cycle: 0,
                leg: Leg::Outbound,
            };
            self.unicast(me, target, Packet::Agent(pkt), Some(Box::new(body)));
        }
        self.after(interval, Ev::FakeAgent { node: me });
    }
}

fn agent_mut(node: &mut super::UavNode) -> &mut super::HomeAgent {
    node.agent.as_mut().expect("caller checked the agent")
}
