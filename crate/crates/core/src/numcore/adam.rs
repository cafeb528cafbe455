use crate::error::{Error, Result};

/// One named parameter tensor and its gradient, presented to the optimizer.
pub struct ParamSlot<'a> {
    pub name: String,
    pub values: &'a mut [f64],
    pub grads: &'a [f64],
}

/// Adam with bias correction. Moment buffers are allocated on the first
/// step and bound to the slot layout seen then.
#[derive(Debug, Clone)]
pub struct AdamState {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    step_count: u64,
    first_moment: Vec<Vec<f64>>,
    second_moment: Vec<Vec<f64>>,
}

impl AdamState {
    pub fn new(learning_rate: f64) -> Self {
        AdamState {
            learning_rate,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            step_count: 0,
            first_moment: Vec::new(),
            second_moment: Vec::new(),
        }
    }

    pub fn step_count(&self) -> u64 {
        self.step_count
    }

    pub fn first_moment(&self) -> &[Vec<f64>] {
        &self.first_moment
    }

    pub fn second_moment(&self) -> &[Vec<f64>] {
        &self.second_moment
    }

    pub fn step(&mut self, slots: &mut [ParamSlot<'_>]) -> Result<()> {
        for slot in slots.iter() {
            if slot.values.len() != slot.grads.len() {
                return Err(Error::Dimension(format!(
                    "`{}` has {} values but {} gradients",
                    slot.name,
                    slot.values.len(),
                    slot.grads.len()
                )));
            }
            if let Some(bad) = slot.grads.iter().find(|g| !g.is_finite()) {
                return Err(Error::training(
                    slot.name.clone(),
                    format!("non-finite gradient {bad}"),
                ));
            }
        }
        if self.first_moment.is_empty() {
            self.first_moment = slots.iter().map(|s| vec![0.0; s.values.len()]).collect();
            self.second_moment = self.first_moment.clone();
        } else if self.first_moment.len() != slots.len()
            || self
                .first_moment
                .iter()
                .zip(slots.iter())
                .any(|(m, s)| m.len() != s.values.len())
        {
            return Err(Error::Dimension(
                "parameter layout changed between optimizer steps".into(),
            ));
        }

        self.step_count += 1;
        let t = self.step_count as i32;
        let (b1, b2) = (self.beta1, self.beta2);
        let c1 = 1.0 - b1.powi(t);
        let c2 = 1.0 - b2.powi(t);
        let lr = self.learning_rate;
        let eps = self.epsilon;

        for ((slot, m), v) in slots
            .iter_mut()
            .zip(&mut self.first_moment)
            .zip(&mut self.second_moment)
        {
            for (((p, &g), mi), vi) in slot
                .values
                .iter_mut()
                .zip(slot.grads)
                .zip(m.iter_mut())
                .zip(v.iter_mut())
            {
                *mi = b1 * *mi + (1.0 - b1) * g;
                *vi = b2 * *vi + (1.0 - b2) * g * g;
                let mhat = *mi / c1;
                let vhat = *vi / c2;
                *p -= lr * mhat / (vhat.sqrt() + eps);
            }
            if slot.values.iter().any(|p| !p.is_finite()) {
                return Err(Error::training(
                    slot.name.clone(),
                    "parameter became non-finite after update",
                ));
            }
        }
        Ok(())
    }
}
