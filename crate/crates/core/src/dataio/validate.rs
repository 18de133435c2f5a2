use super::{SourceStream, VideoRecord};

/// Every invariant violation of `record`, in a stable order. Empty means valid.
pub fn validate_record(record: &VideoRecord) -> Vec<String> {
    let mut out = Vec::new();
    let id = &record.video_id;

    if record.n_frames == 0 {
        out.push(format!("{id}: n_frames must be positive"));
    }
    if record.streams.is_empty() {
        out.push(format!("{id}: streams: no feature streams"));
    }

    for (tag, stream) in &record.streams {
        if stream.source != *tag {
            out.push(format!(
                "{id}: stream `{tag}` carries source tag `{}`",
                stream.source
            ));
        }
        check_stream(id, stream, &mut out);
    }

    // Streams are compared with each other first; picks are only checked
    // against a step count the streams agree on.
    let mut agreed_steps = None;
    let mut iter = record.streams.values();
    if let Some(first) = iter.next() {
        agreed_steps = Some(first.n_steps);
        for other in iter {
            if other.n_steps != first.n_steps {
                out.push(format!(
                    "{id}: streams `{}` ({} steps) and `{}` ({} steps) disagree on n_steps",
                    first.source, first.n_steps, other.source, other.n_steps
                ));
                agreed_steps = None;
            }
        }
    }
    if let Some(n_steps) = agreed_steps {
        if record.picks.len() != n_steps {
            out.push(format!(
                "{id}: picks: length {} does not match n_steps {n_steps}",
                record.picks.len()
            ));
        }
    }

    if record.picks.is_empty() {
        out.push(format!("{id}: picks: empty"));
    }
    if record.picks.windows(2).any(|w| w[1] <= w[0]) {
        out.push(format!("{id}: picks not strictly increasing"));
    }
    if let Some(&last) = record.picks.last() {
        if last >= record.n_frames {
            out.push(format!(
                "{id}: picks: last pick {last} is not below n_frames {}",
                record.n_frames
            ));
        }
    }

    let refs = &record.references;
    if refs.n_users == 0 {
        out.push(format!("{id}: references: n_users must be at least 1"));
    }
    if refs.n_frames != record.n_frames {
        out.push(format!(
            "{id}: references: mask length {} does not match n_frames {}",
            refs.n_frames, record.n_frames
        ));
    }
    if refs.masks.len() != refs.n_users * refs.n_frames {
        out.push(format!(
            "{id}: references: {} mask bytes, expected {} users × {} frames",
            refs.masks.len(),
            refs.n_users,
            refs.n_frames
        ));
    } else {
        for user in 0..refs.n_users {
            if let Some(v) = refs.mask(user).iter().find(|&&v| v > 1) {
                out.push(format!(
                    "{id}: references: user {user} mask contains value {v} (expected 0/1)"
                ));
            }
        }
    }

    if let Some(cps) = &record.change_points {
        check_partition(id, cps, record.n_frames, &mut out);
    }

    out
}

fn check_stream(id: &str, stream: &SourceStream, out: &mut Vec<String>) {
    let tag = stream.source;
    if stream.dim == 0 {
        out.push(format!("{id}: stream `{tag}`: dim must be positive"));
    }
    if stream.n_steps < 2 {
        out.push(format!(
            "{id}: stream `{tag}`: n_steps {} is below 2",
            stream.n_steps
        ));
    }
    if stream.values.len() != stream.n_steps * stream.dim {
        out.push(format!(
            "{id}: stream `{tag}`: {} values, expected {} × {}",
            stream.values.len(),
            stream.n_steps,
            stream.dim
        ));
    }
    if let Some(pos) = stream.values.iter().position(|v| !v.is_finite()) {
        out.push(format!(
            "{id}: stream `{tag}`: non-finite value at flat index {pos}"
        ));
    }
}

fn check_partition(id: &str, cps: &[(usize, usize)], n_frames: usize, out: &mut Vec<String>) {
    if cps.is_empty() {
        out.push(format!("{id}: change_points: empty list"));
        return;
    }
    let mut expected_start = 0;
    for (i, &(start, end)) in cps.iter().enumerate() {
        if start != expected_start {
            out.push(format!(
                "{id}: change_points: segment {i} starts at {start}, expected {expected_start}"
            ));
            return;
        }
        if end <= start {
            out.push(format!("{id}: change_points: segment {i} is empty"));
            return;
        }
        expected_start = end;
    }
    if expected_start != n_frames {
        out.push(format!(
            "{id}: change_points: segments end at {expected_start}, expected n_frames {n_frames}"
        ));
    }
}
