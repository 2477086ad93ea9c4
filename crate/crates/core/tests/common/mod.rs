//! A second, deliberately naive implementation of the rule-agent dynamics,
//! written against the rand crates directly. Fillers and neutral posts never
//! mention a rumor, so histories here only track which rumor a post carries.
#![allow(dead_code)]

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;
use std::thread;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

pub fn sub_seed(master: u64, label: &str) -> ChaCha8Rng {
    let mut bytes = label.as_bytes().to_vec();
    bytes.push(0);
    bytes.extend_from_slice(&master.to_le_bytes());
    let digest = Sha256::digest(&bytes);
    ChaCha8Rng::seed_from_u64(u64::from_le_bytes(digest[..8].try_into().unwrap()))
}

#[derive(Clone, Copy, Debug)]
pub struct Agent {
    pub acc: u8,
    pub spread: u8,
}

#[derive(Clone, Debug)]
pub struct OracleSetup {
    pub n: usize,
    pub edges: Vec<(usize, usize)>,
    pub agents: Vec<Agent>,
    pub rumors: usize,
    pub seeds_per_rumor: usize,
    pub degree_init: bool,
    pub degree_activation: bool,
    pub master: u64,
    pub iterations: u64,
}

#[derive(Debug)]
pub struct OracleRun {
    pub beliefs: Vec<Vec<f64>>,
    pub seeds: Vec<Vec<usize>>,
    pub actors: Vec<usize>,
    /// Believer count per rumor, before the first step and after each one.
    pub believers: Vec<Vec<usize>>,
}

fn pick(rng: &mut ChaCha8Rng, n: usize) -> usize {
    rng.random_range(0..n as u64) as usize
}

pub fn simulate(s: &OracleSetup) -> OracleRun {
    let mut friends = vec![Vec::new(); s.n];
    for &(u, v) in &s.edges {
        friends[u].push(v);
        friends[v].push(u);
    }
    // history[i] holds Some(j) for each post of rumor j the agent can see
    let mut history: Vec<Vec<Option<usize>>> = vec![Vec::new(); s.n];

    let mut init = sub_seed(s.master, "rumor-init");
    let mut seeds = Vec::new();
    for j in 0..s.rumors {
        let chosen: Vec<usize> = if s.degree_init {
            let mut by_degree: Vec<usize> = (0..s.n).collect();
            by_degree.sort_by(|&a, &b| friends[b].len().cmp(&friends[a].len()).then(a.cmp(&b)));
            by_degree[..s.seeds_per_rumor].to_vec()
        } else {
            let mut pool: Vec<usize> = (0..s.n).collect();
            let mut out = Vec::new();
            for i in 0..s.seeds_per_rumor {
                let j = i + pick(&mut init, s.n - i);
                pool.swap(i, j);
                out.push(pool[i]);
            }
            out
        };
        for &a in &chosen {
            history[a].push(Some(j));
        }
        seeds.push(chosen);
    }

    let two_e: usize = friends.iter().map(Vec::len).sum();
    let mut cumulative = Vec::new();
    let mut acc = 0;
    for f in &friends {
        acc += f.len();
        cumulative.push(acc);
    }

    let threshold = |acc: u8| match acc {
        1 => None,
        2 => Some(3),
        3 => Some(2),
        _ => Some(1),
    };

    let mut beliefs = vec![vec![0.0; s.rumors]; s.n];
    let count =
        |b: &Vec<Vec<f64>>| (0..s.rumors).map(|j| b.iter().filter(|row| row[j] >= 0.5).count()).collect::<Vec<_>>();
    let mut believers = vec![count(&beliefs)];
    let mut activation = sub_seed(s.master, "activation");
    let mut actors = Vec::new();
    for _ in 0..s.iterations {
        let i = if s.degree_activation && two_e > 0 {
            let r = pick(&mut activation, two_e);
            cumulative.iter().position(|&c| c > r).unwrap()
        } else {
            pick(&mut activation, s.n)
        };
        actors.push(i);
        let mut seen = vec![0usize; s.rumors];
        for j in history[i].iter().flatten() {
            seen[*j] += 1;
        }
        let t = threshold(s.agents[i].acc);
        let believe: Vec<bool> = seen.iter().map(|&c| t.is_some_and(|t| c >= t)).collect();
        let mut favorite = None;
        for j in 0..s.rumors {
            if believe[j] && favorite.is_none_or(|f: usize| seen[j] > seen[f]) {
                favorite = Some(j);
            }
        }
        let post = if s.agents[i].spread >= 2 { favorite } else { None };
        history[i].push(post);
        for &f in &friends[i] {
            history[f].push(post);
        }
        beliefs[i] = believe.iter().map(|&b| if b { 1.0 } else { 0.0 }).collect();
        believers.push(count(&beliefs));
    }
    OracleRun { beliefs, seeds, actors, believers }
}

/// Serves chat completions on a random port. The first `failures` requests
/// get HTTP 500; later ones get a well-formed reply whose checks alternate
/// with the request count.
pub struct Stub {
    pub url: String,
    pub hits: Arc<AtomicUsize>,
}

pub fn stub(failures: usize) -> Stub {
    let server = tiny_http::Server::http("127.0.0.1:0").unwrap();
    let url = format!("http://{}/v1", server.server_addr().to_ip().unwrap());
    let hits = Arc::new(AtomicUsize::new(0));
    let counter = hits.clone();
    thread::spawn(move || {
        for mut request in server.incoming_requests() {
            let n = counter.fetch_add(1, Ordering::SeqCst);
            let mut body = String::new();
            request.as_reader().read_to_string(&mut body).unwrap();
            let response = if n < failures {
                tiny_http::Response::from_string("overloaded").with_status_code(500)
            } else {
                let req: serde_json::Value = serde_json::from_str(&body).unwrap();
                assert_eq!(req["messages"][0]["role"], "system");
                let verdict = |k: usize| if (n + k).is_multiple_of(3) { "True" } else { "False" };
                let content = format!(
                    "POST\nPost number {n}.\nCHECK\n{} Nicolae Ceaușescu is not dead!\n{} A living dinosaur is found in Yellowstone National Park.\n{} Large Language Models are manned by real people acting as agents.\n{} Drinking 3 ales a day can heal cancer!",
                    verdict(0), verdict(1), verdict(2), verdict(3)
                );
                let reply = serde_json::json!({"choices": [{"message": {"role": "assistant", "content": content}}]});
                tiny_http::Response::from_string(reply.to_string())
            };
            let _ = request.respond(response);
        }
    });
    Stub { url, hits }
}
