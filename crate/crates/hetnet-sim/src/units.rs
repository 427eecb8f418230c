//! Decibel and dBm conversions.
//!
//! All internal math runs on linear quantities; decibels appear only at
//! configuration boundaries and in output records.

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(linear: f64) -> f64 {
    10.0 * linear.log10()
}

pub fn dbm_to_watts(dbm: f64) -> f64 {
    10f64.powf((dbm - 30.0) / 10.0)
}

pub fn watts_to_dbm(watts: f64) -> f64 {
    10.0 * watts.log10() + 30.0
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn db_zero_is_unity() {
        assert_eq!(db_to_linear(0.0), 1.0);
    }

    #[test]
    fn db_common_points() {
        assert_relative_eq!(db_to_linear(10.0), 10.0, max_relative = 1e-12);
        assert_relative_eq!(db_to_linear(3.0), 1.9952623149688795, max_relative = 1e-12);
        assert_relative_eq!(db_to_linear(-10.0), 0.1, max_relative = 1e-12);
    }

    #[test]
    fn dbm_reference_points() {
        assert_relative_eq!(dbm_to_watts(30.0), 1.0, max_relative = 1e-12);
        // 46 dBm and 30 dBm are the default MBS and UABS transmit powers.
        assert_relative_eq!(dbm_to_watts(46.0), 39.810717055349734, max_relative = 1e-12);
        assert_relative_eq!(dbm_to_watts(0.0), 1e-3, max_relative = 1e-12);
    }

    #[test]
    fn conversions_round_trip() {
        for v in [0.01, 0.5, 1.0, 39.81, 1000.0] {
            assert_relative_eq!(db_to_linear(linear_to_db(v)), v, max_relative = 1e-12);
            assert_relative_eq!(dbm_to_watts(watts_to_dbm(v)), v, max_relative = 1e-12);
        }
    }
}
