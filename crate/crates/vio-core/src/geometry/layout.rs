/// Index map of the unknown vector
/// `s = [x_next, y_next, (x_l, y_l, h)·L]`.
///
/// The single authority on which entry means what: the first two entries are
/// the horizontal position of the frame being localized, followed by one
/// `(x, y, height)` triple per landmark. A landmark's height unknown is its
/// vertical distance to the optical center at its *base* frame — the
/// earliest of the two previous frames observing it; heights at other frames
/// are eliminated through altimeter deltas.
#[derive(Debug, Clone)]
pub struct StateLayout {
    landmark_ids: Vec<u64>,
}

pub const POSITION_X: usize = 0;
pub const POSITION_Y: usize = 1;

impl StateLayout {
    /// Layout over the given landmarks, in the given order.
    pub fn new(landmark_ids: Vec<u64>) -> Self {
        Self { landmark_ids }
    }

    pub fn landmark_ids(&self) -> &[u64] {
        &self.landmark_ids
    }

    pub fn landmark_count(&self) -> usize {
        self.landmark_ids.len()
    }

    /// Length of the unknown vector, `2 + 3L`.
    pub fn dim(&self) -> usize {
        2 + 3 * self.landmark_ids.len()
    }

    pub fn landmark_x(&self, slot: usize) -> usize {
        2 + 3 * slot
    }

    pub fn landmark_y(&self, slot: usize) -> usize {
        3 + 3 * slot
    }

    pub fn landmark_height(&self, slot: usize) -> usize {
        4 + 3 * slot
    }

    /// Slot of a landmark id, if present.
    pub fn slot_of(&self, landmark_id: u64) -> Option<usize> {
        self.landmark_ids.iter().position(|&id| id == landmark_id)
    }
}
