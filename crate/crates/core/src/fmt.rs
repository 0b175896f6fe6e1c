/// Shortest representation that parses back to the same `f64`, always with a
/// decimal point or exponent.
pub(crate) fn real(value: f64) -> String {
    format!("{value:?}")
}

#[cfg(test)]
mod tests {
    use super::real;

    #[test]
    fn round_trips() {
        for v in [0.1, -2.0, 1.0 / 3.0, 1e-300, 6.02e23, f64::MIN_POSITIVE] {
            assert_eq!(real(v).parse::<f64>().unwrap().to_bits(), v.to_bits());
        }
        assert_eq!(real(1.0), "1.0");
    }
}
