//! Instance CSV: header `arm,start,end,mean`, one row per segment, 1-based
//! inclusive indices, means in `[0, 1]`.

use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use super::{Segment, SwitchingBanditInstance};
use crate::error::{io_error, Error, Result};

const HEADER: [&str; 4] = ["arm", "start", "end", "mean"];

pub fn load_instance_csv(path: impl AsRef<Path>) -> Result<SwitchingBanditInstance> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| io_error(path, e))?;
    read_instance_csv(file, &path.display().to_string())
}

/// Parse an instance from any reader; `origin` names the source in errors.
pub fn read_instance_csv<R: Read>(reader: R, origin: &str) -> Result<SwitchingBanditInstance> {
    let parse_err = |line: usize, message: String| Error::Parse {
        path: origin.to_string(),
        line,
        message,
    };
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_reader(reader);

    // (line, arm, segment)
    let mut rows: Vec<(usize, usize, Segment)> = Vec::new();
    let mut saw_header = false;
    for record in rdr.records() {
        let record = record.map_err(|e| {
            let line = e.position().map(|p| p.line() as usize).unwrap_or(0);
            parse_err(line, e.to_string())
        })?;
        let line = record.position().map(|p| p.line() as usize).unwrap_or(0);
        if !saw_header {
            if record.iter().ne(HEADER.iter().copied()) {
                return Err(parse_err(line, "expected header `arm,start,end,mean`".into()));
            }
            saw_header = true;
            continue;
        }
        if record.len() != 4 {
            return Err(parse_err(line, format!("expected 4 fields, found {}", record.len())));
        }
        let int = |i: usize| -> Result<usize> {
            record[i]
                .parse::<usize>()
                .map_err(|e| parse_err(line, format!("`{}`: {}: {e}", HEADER[i], &record[i])))
        };
        let arm = int(0)?;
        let start = int(1)?;
        let end = int(2)?;
        let mean: f64 = record[3]
            .parse()
            .map_err(|e| parse_err(line, format!("`mean`: {}: {e}", &record[3])))?;
        if arm == 0 || start == 0 {
            return Err(parse_err(line, "arm and start are 1-based".into()));
        }
        if end < start {
            return Err(parse_err(line, format!("end {end} before start {start}")));
        }
        if !(0.0..=1.0).contains(&mean) {
            return Err(parse_err(line, format!("mean {mean} outside [0, 1]")));
        }
        rows.push((line, arm - 1, Segment { start, end, mean }));
    }
    if !saw_header {
        return Err(parse_err(1, "empty file".into()));
    }
    if rows.is_empty() {
        return Err(parse_err(1, "no segments".into()));
    }

    let arms = rows.iter().map(|r| r.1).max().unwrap_or(0) + 1;
    let horizon = rows.iter().map(|r| r.2.end).max().unwrap_or(0);
    let mut per_arm: Vec<Vec<(usize, Segment)>> = vec![Vec::new(); arms];
    for (line, arm, seg) in rows {
        per_arm[arm].push((line, seg));
    }
    let mut segments = Vec::with_capacity(arms);
    for (a, mut segs) in per_arm.into_iter().enumerate() {
        if segs.is_empty() {
            return Err(parse_err(1, format!("arm {} has no segments", a + 1)));
        }
        segs.sort_by_key(|(_, s)| s.start);
        let mut next = 1;
        for (line, seg) in &segs {
            if seg.start < next {
                return Err(parse_err(*line, format!("arm {}: segment overlaps previous one", a + 1)));
            }
            if seg.start > next {
                return Err(parse_err(*line, format!("arm {}: gap before start {}", a + 1, seg.start)));
            }
            next = seg.end + 1;
        }
        if next != horizon + 1 {
            let (line, _) = segs.last().expect("non-empty");
            return Err(parse_err(*line, format!("arm {}: ends at {} but horizon is {horizon}", a + 1, next - 1)));
        }
        segments.push(segs.into_iter().map(|(_, s)| s).collect());
    }
    SwitchingBanditInstance::new(horizon, segments)
}

pub fn write_instance_csv(instance: &SwitchingBanditInstance, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| io_error(path, e))?;
    write_instance_csv_to(instance, file).map_err(|e| io_error(path, e))
}

pub fn write_instance_csv_to<W: Write>(instance: &SwitchingBanditInstance, writer: W) -> std::io::Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    wtr.write_record(HEADER)?;
    for a in 0..instance.num_arms() {
        for seg in instance.segments(a) {
            // `{}` on f64 is the shortest representation that round-trips.
            wtr.write_record([
                (a + 1).to_string(),
                seg.start.to_string(),
                seg.end.to_string(),
                seg.mean.to_string(),
            ])?;
        }
    }
    wtr.flush()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::env::{generate_instance, GeneratorParams};
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn parse(text: &str) -> Result<SwitchingBanditInstance> {
        read_instance_csv(text.as_bytes(), "test.csv")
    }

    #[test]
    fn stationary_file() {
        let inst = parse("arm,start,end,mean\n1,1,100,0.5\n2,1,100,0.25\n").unwrap();
        assert_eq!(inst.num_arms(), 2);
        assert_eq!(inst.horizon(), 100);
        assert_eq!(inst.change_count(), 0);
    }

    #[test]
    fn errors_name_the_line() {
        let err = parse("arm,start,end,mean\n1,1,50,0.5\n1,40,100,0.2\n2,1,100,0.3\n").unwrap_err();
        match err {
            Error::Parse { line, message, .. } => {
                assert_eq!(line, 3);
                assert!(message.contains("overlap"), "{message}");
            }
            other => panic!("{other}"),
        }
        let err = parse("arm,start,end,mean\n1,1,100,0.5\n2,1,100,1.5\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 3, .. }), "{err}");
        let err = parse("arm,start,end,mean\n1,1,100,0.5\n2,1,x,0.5\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 3, .. }), "{err}");
        let err = parse("arm,start,end,mean\n1,1,50,0.5\n1,52,100,0.2\n2,1,100,0.3\n").unwrap_err();
        assert!(err.to_string().contains("gap"), "{err}");
        assert!(parse("a,b,c,d\n1,1,100,0.5\n").is_err());
        assert!(parse("").is_err());
    }

    #[test]
    fn rows_may_come_in_any_order() {
        let inst = parse("arm,start,end,mean\n2,1,10,0.1\n1,6,10,0.9\n1,1,5,0.3\n").unwrap();
        assert_eq!(inst.change_count(), 1);
        assert_eq!(inst.mean(0, 6), 0.9);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn round_trip_is_bit_exact(seed in any::<u64>(), arms in 2usize..6, changes in 0usize..8) {
            let params = GeneratorParams::new(arms, 3000, changes, 0.15);
            let inst = generate_instance(&params, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
            let mut buf = Vec::new();
            write_instance_csv_to(&inst, &mut buf).unwrap();
            let back = read_instance_csv(buf.as_slice(), "mem").unwrap();
            prop_assert_eq!(&back, &inst);
            let mut again = Vec::new();
            write_instance_csv_to(&back, &mut again).unwrap();
            prop_assert_eq!(buf, again);
        }
    }
}
