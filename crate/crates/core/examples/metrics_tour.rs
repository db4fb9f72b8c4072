//! Partition metrics and trial aggregation on small hand-made inputs.

use adcsbm::metrics::{aggregate, classification_accuracy, clustering_accuracy, nmi, spearman};

fn main() -> adcsbm::Result<()> {
    let a = [0, 0, 1, 1];
    let swapped = [1, 1, 0, 0];
    let crossed = [0, 1, 0, 1];
    println!("nmi(a, swapped)       {}", nmi(&a, &swapped)?);
    println!("nmi(a, crossed)       {}", nmi(&a, &crossed)?);
    println!("accuracy(a, swapped)  {}", clustering_accuracy(&a, &swapped)?);
    println!("accuracy(a, crossed)  {}", clustering_accuracy(&a, &crossed)?);
    println!(
        "masked accuracy       {}",
        classification_accuracy(&[0, 1, 2, 3, 9], &[0, 1, 2, 0, 0], &[true, true, true, true, false])?
    );
    let s = aggregate(&[1.0, 2.0, 3.0, 4.0, 5.0], 0.95)?;
    println!("mean {} ± {:.4} over {} trials", s.mean, s.half_width, s.n_trials);
    println!("spearman              {}", spearman(&[1.0, 2.0, 3.0, 4.0], &[0.1, 0.4, 0.3, 0.9])?);
    Ok(())
}
