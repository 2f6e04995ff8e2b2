use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// A point inside the square arena, in meters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Position {
    pub x: f64,
    pub y: f64,
}

impl Position {
    pub fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn distance(&self, other: &Position) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    pub fn clamped(self, side: f64) -> Position {
        Position {
            x: self.x.clamp(0.0, side),
            y: self.y.clamp(0.0, side),
        }
    }
}

/// Random-waypoint mobility for a fixed population of nodes.
#[derive(Debug, Clone)]
pub struct RandomWaypoint {
    side: f64,
    speed: f64,
    positions: Vec<Position>,
    waypoints: Vec<Position>,
    rng: ChaCha8Rng,
}

impl RandomWaypoint {
    /// Places `n` nodes uniformly in the arena and draws a first waypoint for each.
    pub fn new(n: usize, side: f64, speed: f64, mut rng: ChaCha8Rng) -> Self {
        let positions: Vec<Position> = (0..n).map(|_| uniform_point(&mut rng, side)).collect();
        let waypoints: Vec<Position> = (0..n).map(|_| uniform_point(&mut rng, side)).collect();
        Self {
            side,
            speed,
            positions,
            waypoints,
            rng,
        }
    }

    /// Fixed positions with waypoints equal to the positions. Useful for
    /// static topologies; `move_nodes` never changes them while speed is 0.
    pub fn fixed(positions: Vec<Position>, side: f64, rng: ChaCha8Rng) -> Self {
        let waypoints = positions.clone();
        Self {
            side,
            speed: 0.0,
            positions,
            waypoints,
            rng,
        }
    }

    pub fn with_waypoints(mut self, waypoints: Vec<Position>) -> Self {
        assert_eq!(waypoints.len(), self.positions.len());
        self.waypoints = waypoints;
        self
    }

    pub fn set_speed(&mut self, speed: f64) {
        self.speed = speed;
    }

    pub fn side(&self) -> f64 {
        self.side
    }

    pub fn positions(&self) -> &[Position] {
        &self.positions
    }

    pub fn waypoint(&self, i: usize) -> Position {
        self.waypoints[i]
    }

    /// Advances each alive node toward its waypoint by `speed * dt`.
    ///
    /// A node that would reach or overshoot its waypoint stops on it and
    /// draws a fresh uniform waypoint. Dead nodes stay where they are.
    pub fn move_nodes(&mut self, dt: f64, alive: &[bool]) {
        if dt <= 0.0 || self.speed <= 0.0 {
            return;
        }
        let step = self.speed * dt;
        for i in 0..self.positions.len() {
            if !alive.get(i).copied().unwrap_or(true) {
                continue;
            }
            let here = self.positions[i];
            let target = self.waypoints[i];
            let dist = here.distance(&target);
            if dist <= step {
                self.positions[i] = target.clamped(self.side);
                self.waypoints[i] = uniform_point(&mut self.rng, self.side);
            } else {
                let f = step / dist;
                self.positions[i] = Position::new(
                    here.x + (target.x - here.x) * f,
                    here.y + (target.y - here.y) * f,
                )
                .clamped(self.side);
            }
        }
    }
}

fn uniform_point(rng: &mut ChaCha8Rng, side: f64) -> Position {
    Position::new(rng.gen_range(0.0..=side), rng.gen_range(0.0..=side))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    #[test]
    fn advances_along_leg() {
        let mut m = RandomWaypoint::fixed(vec![Position::new(0.0, 0.0)], 2000.0, rng(1))
            .with_waypoints(vec![Position::new(100.0, 0.0)]);
        m.set_speed(180.0);
        m.move_nodes(0.25, &[true]);
        let p = m.positions()[0];
        assert!((p.x - 45.0).abs() < 1e-9 && p.y.abs() < 1e-12);
    }

    #[test]
    fn overshoot_stops_on_waypoint_and_redraws() {
        let mut m = RandomWaypoint::fixed(vec![Position::new(0.0, 0.0)], 2000.0, rng(1))
            .with_waypoints(vec![Position::new(100.0, 0.0)]);
        m.set_speed(180.0);
        m.move_nodes(1.0, &[true]);
        assert_eq!(m.positions()[0], Position::new(100.0, 0.0));
        assert_ne!(m.waypoint(0), Position::new(100.0, 0.0));
    }

    #[test]
    fn dead_nodes_do_not_move() {
        let mut m = RandomWaypoint::new(3, 2000.0, 180.0, rng(9));
        let before = m.positions().to_vec();
        m.move_nodes(1.0, &[false, true, false]);
        assert_eq!(m.positions()[0], before[0]);
        assert_eq!(m.positions()[2], before[2]);
        assert_ne!(m.positions()[1], before[1]);
    }

    #[test]
    fn same_seed_same_trajectory() {
        let run = |seed| {
            let mut m = RandomWaypoint::new(20, 2000.0, 180.0, rng(seed));
            let alive = vec![true; 20];
            for _ in 0..500 {
                m.move_nodes(0.1, &alive);
            }
            m.positions().to_vec()
        };
        assert_eq!(run(42), run(42));
        assert_ne!(run(42), run(43));
    }

    #[test]
    fn stays_inside_arena() {
        let mut m = RandomWaypoint::new(50, 500.0, 180.0, rng(5));
        let alive = vec![true; 50];
        for _ in 0..1000 {
            m.move_nodes(0.1, &alive);
            for p in m.positions() {
                assert!((0.0..=500.0).contains(&p.x) && (0.0..=500.0).contains(&p.y));
            }
        }
    }
}
