mod common;

use std::collections::HashMap;

use common::*;
use tokio_util::sync::CancellationToken;
use wxline::clock::SimClock;
use wxline::collector::{poll_once, Link, PollFailure};
use wxline::logstore::{aggregate, read_all};
use wxline::nodesim::{spawn_in_process, CorruptionModel, Node, NodeConfig};

#[tokio::test(start_paused = true)]
async fn healthy_node_answers_within_latency() {
    let clock = SimClock::new(origin(), 1);
    let shutdown = CancellationToken::new();
    let (pipe, _node) = spawn_in_process(Node::new(node_config(1)).unwrap(), clock.clone(), shutdown.clone());
    let mut link = Link::attached(pipe);
    for i in 0..20 {
        let polled = poll_once(&mut link, id(1), secs(8), &clock).await.unwrap();
        assert_eq!(polled.reading.seq.get(), i);
        assert!(polled.latency >= secs(4) && polled.latency <= secs(5), "{:?}", polled.latency);
        clock.sleep(secs(5)).await;
    }
    shutdown.cancel();
}

#[tokio::test(start_paused = true)]
async fn absent_node_times_out_after_timeout() {
    let clock = SimClock::new(origin(), 1);
    let (near, _far) = tokio::io::duplex(64);
    let mut link = Link::attached(near);
    let start = clock.now();
    let got = poll_once(&mut link, id(1), secs(8), &clock).await;
    assert_eq!(got, Err(PollFailure::Timeout));
    assert_eq!((clock.now() - start).to_std().unwrap(), secs(8));
}

#[tokio::test(start_paused = true)]
async fn closed_transport_is_malformed() {
    let clock = SimClock::new(origin(), 1);
    let (near, far) = tokio::io::duplex(64);
    drop(far);
    let mut link = Link::attached(near);
    assert!(matches!(poll_once(&mut link, id(1), secs(8), &clock).await, Err(PollFailure::Malformed(_))));
}

#[tokio::test]
async fn unreachable_tcp_node_counts_as_timeout() {
    let listener = std::net::TcpListener::bind("127.0.0.1:0").unwrap();
    let addr = listener.local_addr().unwrap();
    drop(listener);
    let clock = SimClock::new(origin(), 1);
    let mut link = Link::tcp(addr.to_string());
    assert_eq!(poll_once(&mut link, id(1), secs(1), &clock).await, Err(PollFailure::Timeout));
}

#[tokio::test]
async fn polls_over_tcp() {
    let listener = tokio::net::TcpListener::bind("127.0.0.1:0").await.unwrap();
    let addr = listener.local_addr().unwrap();
    let clock = SimClock::new(origin(), 1000);
    let shutdown = CancellationToken::new();
    {
        let (clock, shutdown) = (clock.clone(), shutdown.clone());
        tokio::spawn(async move {
            let (sock, _) = listener.accept().await.unwrap();
            let mut node = Node::new(node_config(4)).unwrap();
            wxline::nodesim::run_node(&mut node, sock, &clock, &shutdown).await.unwrap();
        });
    }
    let mut link = Link::tcp(addr.to_string());
    for _ in 0..3 {
        let polled = poll_once(&mut link, id(4), secs(8), &clock).await.unwrap();
        assert_eq!(polled.reading.station_id, id(4));
    }
    shutdown.cancel();
}

// Every reading the collector accepts must equal what the node sent with
// that sequence number; the node's trace is the ground truth.
#[tokio::test(start_paused = true)]
async fn heavy_corruption_is_detected_never_silent() {
    let clock = SimClock::new(origin(), 1);
    let shutdown = CancellationToken::new();
    let cfg = NodeConfig {
        baud: 1_000_000,
        corruption: CorruptionModel { p_max: 0.5, ..Default::default() },
        ..node_config(1)
    };
    let (pipe, handle) =
        spawn_in_process(Node::new(cfg).unwrap().with_trace(), clock.clone(), shutdown.clone());
    let mut link = Link::attached(pipe);
    let mut received = Vec::new();
    let mut checksum_errors = 0;
    for _ in 0..300 {
        match poll_once(&mut link, id(1), secs(8), &clock).await {
            Ok(p) => received.push(p.reading),
            Err(PollFailure::ChecksumMismatch(_)) => checksum_errors += 1,
            Err(_) => {}
        }
        clock.sleep(secs(2)).await;
    }
    drop(link);
    let node = handle.await.unwrap().unwrap();
    let truth: HashMap<_, _> = node.trace().iter().map(|r| (r.seq, *r)).collect();
    assert!(checksum_errors > 0);
    for r in &received {
        assert_eq!(truth.get(&r.seq), Some(r));
    }
}

#[tokio::test(start_paused = true)]
async fn sixty_seconds_gives_six_or_seven_records() {
    let dir = tempfile::tempdir().unwrap();
    let mut rig = Rig::start(collector_config(dir.path(), &[1]), vec![node_config(1)], 1);
    rig.run_until(60).await;
    rig.stop().await;
    let records = read_all(dir.path(), None).unwrap().records;
    // Ticks at 0..=60 s fall on a fixed 10 s grid.
    let ticks_in_window = (0..=60).step_by(10).count();
    assert!((6..=ticks_in_window).contains(&records.len()), "{}", records.len());
    for pair in records.windows(2) {
        assert_eq!(pair[0].reading.seq.distance_to(pair[1].reading.seq), 1);
        assert!(pair[0].rx_time < pair[1].rx_time);
    }
}

#[tokio::test(start_paused = true)]
async fn two_stations_logged_in_id_order_each_tick() {
    let dir = tempfile::tempdir().unwrap();
    let mut rig = Rig::start(collector_config(dir.path(), &[2, 1]), vec![node_config(2), node_config(1)], 1);
    rig.run_until(100).await;
    rig.stop().await;
    let records = read_all(dir.path(), None).unwrap().records;
    assert_eq!(records.len() % 2, 0);
    for tick in records.chunks(2) {
        assert_eq!(tick[0].reading.station_id, id(1));
        assert_eq!(tick[1].reading.station_id, id(2));
    }
}

#[tokio::test(start_paused = true)]
async fn shutdown_mid_tick_lets_the_poll_finish() {
    let dir = tempfile::tempdir().unwrap();
    let mut rig = Rig::start(collector_config(dir.path(), &[1]), vec![node_config(1)], 1);
    // Tick 3 starts at 30 s; its answer lands at 34-35 s.
    rig.run_until(32).await;
    rig.stop().await;
    let got = read_all(dir.path(), None).unwrap();
    assert_eq!(got.records.len(), 4);
    assert_eq!(got.malformed, 0);
    let text = std::fs::read_to_string(dir.path().join("wx-2024-06-15.csv")).unwrap();
    assert!(text.ends_with('\n'));
}

#[tokio::test(start_paused = true)]
async fn state_agrees_with_log_and_online_aggregates() {
    let dir = tempfile::tempdir().unwrap();
    let mut rig = Rig::start(collector_config(dir.path(), &[1, 2]), vec![node_config(1), node_config(2)], 1);
    let before = rig.station().state.snapshot();
    assert!(before.iter().all(|s| s.last_reading.is_none() && s.totals.polls == 0));
    rig.run_until(400).await;
    let state = rig.station().state.clone();
    rig.stop().await;
    for s in state.snapshot() {
        let logged = read_all(dir.path(), Some(s.station_id)).unwrap().records;
        assert_eq!(s.totals.ok as usize, logged.len());
        assert!(s.totals.conserved());
        let window = (origin(), origin() + chrono::Duration::hours(1));
        assert_eq!(s.online.finish(window), aggregate(&logged, window));
        assert_eq!(s.last_record(), logged.last().copied());
    }
}

#[tokio::test(start_paused = true)]
async fn missing_node_shows_up_as_timeouts() {
    let dir = tempfile::tempdir().unwrap();
    let clock = SimClock::new(origin(), 1);
    let (near, _far) = tokio::io::duplex(64);
    let shutdown = CancellationToken::new();
    let station = wxline::station::launch(
        collector_config(dir.path(), &[1]),
        clock.clone(),
        vec![(id(1), Link::attached(near))],
        false,
        shutdown.clone(),
    )
    .unwrap();
    let state = station.state.clone();
    clock.sleep(secs(55)).await;
    shutdown.cancel();
    station.join().await.unwrap();
    let s = &state.snapshot()[0];
    assert_eq!((s.totals.polls, s.totals.timeouts, s.totals.ok), (6, 6, 0));
    assert_eq!(s.consecutive_failures, 6);
    assert!(read_all(dir.path(), None).unwrap().records.is_empty());
}

#[test]
fn unwritable_log_dir_fails_before_polling() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("file");
    std::fs::write(&file, "").unwrap();
    let cfg = collector_config(&file.join("logs"), &[1]);
    let rt = tokio::runtime::Builder::new_current_thread().enable_all().build().unwrap();
    rt.block_on(async {
        let got = wxline::collector::Collector::new(cfg, SimClock::new(origin(), 1), Vec::new());
        assert!(matches!(got, Err(wxline::collector::CollectorError::OpenLog { .. })));
    });
}
