/// One measurement-tick sample.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Sample {
    pub t: f64,
    /// Sender-side error against its own mirror.
    pub e_s: f64,
    /// Receiver-side error against ground truth; NaN before the first delivery.
    pub e_r: f64,
    /// Position threshold in force.
    pub th: f64,
    /// `e_s` signed by its projection on the direction of motion.
    pub e_signed: f64,
    pub speed: f64,
    pub acceleration: f64,
}

/// One delivered packet.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Delivery {
    pub sequence: u32,
    pub t_send: f64,
    pub t_arrive: f64,
}

/// Outcome of one scenario run. Times in seconds, distances in meters.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct MetricsReport {
    pub series: Vec<Sample>,
    pub deliveries: Vec<Delivery>,
    /// Send time of every emitted packet.
    pub emissions: Vec<f64>,
    pub duration: f64,
    pub packets_sent: u64,
    pub packets_delivered: u64,
    pub packets_dropped: u64,
    pub packets_in_flight: u64,
    pub packets_stale: u64,
    /// Packets forced by a threshold crossing, as opposed to the first packet and heartbeats.
    pub threshold_packets: u64,
    pub heartbeat_packets: u64,
    /// Sent packets per second.
    pub mean_update_frequency: f64,
    pub max_e_r: f64,
    pub mean_e_r: f64,
    pub max_e_s: f64,
    /// Fraction of measurement ticks with `e_r > th`.
    pub incoherence_ratio: f64,
    /// Delivered bytes per second.
    pub bandwidth: f64,
    pub delay_mean: f64,
    pub delay_p50: f64,
    pub delay_p100: f64,
    /// Dropped over sent.
    pub loss_ratio: f64,
    /// Largest threshold the policy can return.
    pub th_pos_max: f64,
    /// Twice the trajectory's peak speed.
    pub v_dev_max: f64,
    /// Twice the trajectory's peak acceleration.
    pub a_dev_max: f64,
}

impl MetricsReport {
    pub fn threshold_rate(&self) -> f64 {
        if self.duration > 0.0 {
            self.threshold_packets as f64 / self.duration
        } else {
            0.0
        }
    }

    /// Bitwise equality, treating matching NaNs as equal.
    pub fn identical(&self, other: &Self) -> bool {
        format!("{self:?}") == format!("{other:?}")
    }

    pub fn conserves_packets(&self) -> bool {
        self.packets_sent == self.packets_delivered + self.packets_dropped + self.packets_in_flight
    }

    /// Summary fields as `(key, value)` pairs in a fixed order.
    pub fn summary(&self) -> Vec<(&'static str, f64)> {
        vec![
            ("duration_s", self.duration),
            ("packets_sent", self.packets_sent as f64),
            ("packets_delivered", self.packets_delivered as f64),
            ("packets_dropped", self.packets_dropped as f64),
            ("packets_in_flight", self.packets_in_flight as f64),
            ("packets_stale", self.packets_stale as f64),
            ("threshold_packets", self.threshold_packets as f64),
            ("heartbeat_packets", self.heartbeat_packets as f64),
            ("mean_update_frequency_hz", self.mean_update_frequency),
            ("max_e_r_m", self.max_e_r),
            ("mean_e_r_m", self.mean_e_r),
            ("max_e_s_m", self.max_e_s),
            ("incoherence_ratio", self.incoherence_ratio),
            ("bandwidth_bytes_per_s", self.bandwidth),
            ("delay_mean_s", self.delay_mean),
            ("delay_p50_s", self.delay_p50),
            ("delay_p100_s", self.delay_p100),
            ("loss_ratio", self.loss_ratio),
        ]
    }
}
