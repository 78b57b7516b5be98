use std::path::Path;

use graphmetric::{
    distance_distribution, generate, log_distance_ratio_distribution, Digraph, Error, GraphKind, SampleSource,
    SampleSpec,
};

use crate::Failure;

pub const IDS: [&str; 12] = ["1A", "1B", "1C", "1D", "2", "3", "4A", "4B", "4C", "5", "6", "7"];

pub const HELP: &str = "\
Reproduce one of the distribution figures.

Writes fig-<id>[-<panel>].csv and .svg into --out (default: current directory).
Every explicit edge has weight 1 and self-loops are implicit. --seed drives
both the random graph families and the pair sampler. Pair count and bin count
default to 100000 and 64.

  1A  distance, cube volume, N=4: null graph
  1B  distance, cube volume, N=4: star, edges 0->1, 0->2, 0->3 (star-out)
  1C  distance, cube volume, N=4: chain, edges 0->1->2->3
  1D  distance, cube volume, N=4: complete bidirectional graph
  2   cube volume, N=4, log-ratio and distance panels for
        triangle:  bidirectional 3-cycle on 0,1,2, vertex 3 isolated
        pendant:   triangle plus bidirectional edge 2-3
        square:    bidirectional 4-cycle 0-1-2-3-0
  3   log-ratio, cube volume: path on 3 vertices, triangle, 4-cycle, complete K4
  4A  distance, cube vertices, N=8, exhaustive: null graph (Hamming weights)
  4B  distance, cube vertices, N=8, exhaustive: chain 0->1->...->7 evaluated
      on its transitive closure (chain poset)
  4C  distance, cube vertices, N=8, exhaustive: star with edges leaf->0
      (star-in), evaluated on its transitive closure (star poset)
  5   log-ratio, cube volume, 60 vertices: random sparse (90 undirected
      edges), buckyball, 6x10 grid
  6   log-ratio, cube volume: Watts-Strogatz n=64 k=10, beta 0 and 0.025,
      directed by keeping edges (j, i) with j <= i (upper)
  7   log-ratio, cube volume: Watts-Strogatz n=64 k=4 beta=0.2, undirected
      (full) and upper-directed (upper)";

#[derive(Clone, Copy)]
enum Quantity {
    Distance,
    LogRatio,
}

struct Panel {
    name: &'static str,
    graph: Digraph,
    source: SampleSource,
    quantity: Quantity,
}

fn g(kind: GraphKind) -> Result<Digraph, Error> {
    generate(&kind, 1.0)
}

fn undirected(n: usize, pairs: &[(usize, usize)]) -> Result<Digraph, Error> {
    let edges = pairs.iter().flat_map(|&(a, b)| [(a, b, 1.0), (b, a, 1.0)]);
    Digraph::from_edges(n, true, edges)
}

fn volume(name: &'static str, graph: Digraph, quantity: Quantity) -> Panel {
    Panel {
        name,
        graph,
        source: SampleSource::CubeVolume,
        quantity,
    }
}

fn vertices(name: &'static str, graph: Digraph) -> Panel {
    Panel {
        name,
        graph,
        source: SampleSource::CubeVertices,
        quantity: Quantity::Distance,
    }
}

fn recipe(id: &str, seed: u64) -> Result<Vec<Panel>, Error> {
    use Quantity::*;
    let triangle = [(0, 1), (1, 2), (2, 0)];
    let square = [(0, 1), (1, 2), (2, 3), (3, 0)];
    let ws = |k, beta| g(GraphKind::WattsStrogatz { n: 64, k, beta, seed });
    Ok(match id {
        "1A" => vec![volume("", g(GraphKind::Null { n: 4 })?, Distance)],
        "1B" => vec![volume("", g(GraphKind::StarOut { n: 4 })?, Distance)],
        "1C" => vec![volume("", g(GraphKind::Chain { n: 4 })?, Distance)],
        "1D" => vec![volume("", g(GraphKind::Complete { n: 4 })?, Distance)],
        "2" => {
            let pendant = [(0, 1), (1, 2), (2, 0), (2, 3)];
            vec![
                volume("triangle-logratio", undirected(4, &triangle)?, LogRatio),
                volume("triangle-distance", undirected(4, &triangle)?, Distance),
                volume("pendant-logratio", undirected(4, &pendant)?, LogRatio),
                volume("pendant-distance", undirected(4, &pendant)?, Distance),
                volume("square-logratio", undirected(4, &square)?, LogRatio),
                volume("square-distance", undirected(4, &square)?, Distance),
            ]
        }
        "3" => vec![
            volume("path3", undirected(3, &[(0, 1), (1, 2)])?, LogRatio),
            volume("triangle", undirected(3, &triangle)?, LogRatio),
            volume("square", undirected(4, &square)?, LogRatio),
            volume("complete4", g(GraphKind::Complete { n: 4 })?, LogRatio),
        ],
        "4A" => vec![vertices("", g(GraphKind::Null { n: 8 })?)],
        "4B" => vec![vertices("", g(GraphKind::Chain { n: 8 })?.transitive_closure())],
        "4C" => vec![vertices("", g(GraphKind::StarIn { n: 8 })?.transitive_closure())],
        "5" => vec![
            volume("random-sparse", g(GraphKind::RandomSparse { n: 60, m: 90, seed })?, LogRatio),
            volume("buckyball", g(GraphKind::Buckyball)?, LogRatio),
            volume("grid", g(GraphKind::Grid2d { rows: 6, cols: 10 })?, LogRatio),
        ],
        "6" => vec![
            volume("beta0", ws(10, 0.0)?.upper(), LogRatio),
            volume("beta0.025", ws(10, 0.025)?.upper(), LogRatio),
        ],
        "7" => vec![
            volume("full", ws(4, 0.2)?, LogRatio),
            volume("upper", ws(4, 0.2)?.upper(), LogRatio),
        ],
        other => return Err(Error::InvalidParameter(format!("unknown figure id `{other}`"))),
    })
}

pub fn reproduce(out: Option<&Path>, seed: u64, id: &str, pairs: usize, bins: usize) -> Result<(), Failure> {
    let dir = out.unwrap_or(Path::new("."));
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    for panel in recipe(id, seed)? {
        let spec = SampleSpec::new(panel.source, pairs, seed);
        let space = panel.source.space(panel.graph.clone());
        let summary = match panel.quantity {
            Quantity::Distance => distance_distribution(&space, &spec, bins)?,
            Quantity::LogRatio => log_distance_ratio_distribution(&space, &spec, bins)?,
        };
        let stem = if panel.name.is_empty() {
            format!("fig-{id}")
        } else {
            format!("fig-{id}-{}", panel.name)
        };
        let graph_line = format!(
            "# figure={id} panel={} graph_n={} graph_edges={}\n",
            if panel.name.is_empty() { "-" } else { panel.name },
            panel.graph.n(),
            panel.graph.edge_count()
        );
        let csv_path = dir.join(format!("{stem}.csv"));
        std::fs::write(&csv_path, graph_line + &summary.to_csv_string()).map_err(|e| Error::io(&csv_path, e))?;
        let svg_path = dir.join(format!("{stem}.svg"));
        std::fs::write(&svg_path, summary.to_svg_string()).map_err(|e| Error::io(&svg_path, e))?;
        println!("{}", csv_path.display());
        println!("{}", svg_path.display());
    }
    Ok(())
}
