//! The cache and shuffle models on their own.
use graphitron::archsim::{bank_of, shuffle_apply, CacheModel, Update};
use graphitron::sema::ReduceOp;
use graphitron::interp::Value;

fn main() {
    let mut cache = CacheModel::new(4, 2, true);
    for addr in [0, 1, 2, 3, 0, 9, 8, 0] {
        let hit = cache.access(addr);
        println!("read {addr:>2}: {}", if hit { "hit" } else { "miss" });
    }
    println!("hits {}, misses {}, prefetches {}, words fetched {}", cache.hits, cache.misses, cache.prefetches, cache.words_fetched());

    let lanes = 4;
    let updates: Vec<Update> = [5, 1, 9, 13, 2, 5]
        .iter()
        .map(|&index| Update { prop: 0, index, op: ReduceOp::Sum, value: Value::Int(1) })
        .collect();
    let mut image = vec![0i64; 16];
    let outcome = shuffle_apply(&updates, lanes, |u| {
        image[u.index] += u.value.as_int();
        Ok::<(), ()>(())
    })
    .unwrap();
    for u in &updates {
        println!("update to {:>2} -> bank {}", u.index, bank_of(u.index, lanes));
    }
    println!("{outcome:?}");
    println!("image {image:?}");
}
