// Scores a short hexapod contact log with the trot and synchronisation rewards.

use frictionlab::gait::{self, ContactFrame, ContactGroups, ContactLog};

pub fn run_example() -> frictionlab::Result<()> {
    let trot = ContactGroups::TROT;
    let all_down = ContactFrame([true; 6]);
    // Four alternating trot frames, a stumble with every foot down, then a
    // stretch where one tripod carries the robot alone.
    let mut frames = Vec::new();
    for i in 0..4 {
        frames.push(if i % 2 == 0 {
            trot.frame0()
        } else {
            trot.frame1()
        });
    }
    frames.push(all_down);
    frames.extend(std::iter::repeat_n(trot.frame0(), 5));

    let log = ContactLog {
        times: (0..frames.len()).map(|i| i as f64 * 0.02).collect(),
        frames,
    };
    let series = gait::reward_series(&log, 4)?;
    println!("  t     r_trot  r_unsync(H={})", series.window);
    for row in &series.rows {
        let unsync = row.r_unsync.map_or("-".to_string(), |v| v.to_string());
        println!("{:5.2}  {:>6}  {:>8}", row.t, row.r_trot, unsync);
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> frictionlab::Result<()> {
    run_example()
}
