use fdpu_core::io::{decode_binary, default_names, encode_binary, format_csv_matrix, parse_csv_matrix, NamedMatrix};
use nalgebra::DMatrix;
use proptest::prelude::*;

fn finite() -> impl Strategy<Value = f64> {
    prop::num::f64::NORMAL | prop::num::f64::SUBNORMAL | prop::num::f64::ZERO
}

fn matrix() -> impl Strategy<Value = DMatrix<f64>> {
    (1usize..6, 1usize..6).prop_flat_map(|(r, c)| {
        prop::collection::vec(finite(), r * c).prop_map(move |v| DMatrix::from_row_slice(r, c, &v))
    })
}

proptest! {
    #[test]
    fn csv_round_trip(data in matrix()) {
        let m = NamedMatrix { names: default_names(data.ncols()), data };
        let back = parse_csv_matrix(&format_csv_matrix(&m).unwrap()).unwrap();
        prop_assert_eq!(back, m);
    }

    #[test]
    fn binary_round_trip(data in matrix()) {
        prop_assert_eq!(decode_binary(&encode_binary(&data)).unwrap(), data);
    }

    #[test]
    fn decoders_never_panic(bytes in prop::collection::vec(any::<u8>(), 0..200)) {
        let _ = decode_binary(&bytes);
        let _ = parse_csv_matrix(&bytes);
    }

    #[test]
    fn binary_header_fuzz(rows in any::<u64>(), cols in any::<u64>(), body in prop::collection::vec(any::<u8>(), 0..64)) {
        let mut bytes = b"FDPUMAT1".to_vec();
        bytes.extend_from_slice(&rows.to_le_bytes());
        bytes.extend_from_slice(&cols.to_le_bytes());
        bytes.extend_from_slice(&body);
        if let Ok(m) = decode_binary(&bytes) {
            prop_assert_eq!(m.len() * 8, body.len());
        }
    }
}
