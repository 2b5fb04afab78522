//! Building outcome series from labeled corpora: per-generation bias
//! proportions from article labels, and the text quality index
//! (clean = 3 … noise = 0, averaged per article, articles weighted
//! equally) from sentence categories.
//!
//! Run with: cargo run --example label_metrics

use driftlab::metrics::{
    bias_proportions, build_bias_series, build_quality_series, read_article_labels,
    read_sentence_quality, BiasLabel,
};

const ARTICLES: &str = r#"
{"generation":0,"article_id":"a1","label":"right"}
{"generation":0,"article_id":"a2","label":"center"}
{"generation":0,"article_id":"a3","label":"center"}
{"generation":0,"article_id":"a4","label":"left"}
{"generation":1,"article_id":"b1","label":"right"}
{"generation":1,"article_id":"b2","label":"right"}
{"generation":1,"article_id":"b3","label":"center"}
{"generation":1,"article_id":"b4","label":"left"}
{"generation":2,"article_id":"c1","label":"right"}
{"generation":2,"article_id":"c2","label":"right"}
{"generation":2,"article_id":"c3","label":"right"}
{"generation":2,"article_id":"c4","label":"center"}
"#;

const SENTENCES: &str = r#"
{"generation":0,"article_id":"a1","sentence_index":0,"category":"clean"}
{"generation":0,"article_id":"a1","sentence_index":1,"category":"clean"}
{"generation":0,"article_id":"a2","sentence_index":0,"category":"clean"}
{"generation":1,"article_id":"b1","sentence_index":0,"category":"clean"}
{"generation":1,"article_id":"b1","sentence_index":1,"category":"mild_gibberish"}
{"generation":1,"article_id":"b2","sentence_index":0,"category":"mild_gibberish"}
{"generation":2,"article_id":"c1","sentence_index":0,"category":"word_salad"}
{"generation":2,"article_id":"c1","sentence_index":1,"category":"noise"}
{"generation":2,"article_id":"c2","sentence_index":0,"category":"mild_gibberish"}
"#;

fn main() {
    let articles = read_article_labels(ARTICLES.trim().as_bytes()).expect("bad article JSONL");
    let sentences = read_sentence_quality(SENTENCES.trim().as_bytes()).expect("bad sentence JSONL");

    println!("per-generation label proportions:");
    for g in 0..=2 {
        let p = bias_proportions(&articles, g).expect("generation present");
        println!(
            "  gen {g}: left {:.2}, center {:.2}, right {:.2}",
            p.left, p.center, p.right
        );
    }

    let bias = build_bias_series(&articles, BiasLabel::Right).expect("bias series");
    println!("\n{} series: {:?}", bias.label, bias.values);

    let quality = build_quality_series(&sentences).expect("quality series");
    println!("{} series: {:?}", quality.label, quality.values);
    println!("\n(the right-leaning share rises while the quality index decays)");
}
