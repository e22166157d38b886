//! HAM, a small literate program that counts Hamiltonian circuits of a
//! GraphBase graph, together with the meaning files it is woven against.
//!
//! The program text is a reconstruction: it keeps every fragment that is
//! known from the published discussion of the program (the macros, the
//! index overrides, the joined line in section 7, eleven sections on five
//! spreads) and fills in the rest as plain, believable C.

use std::io;
use std::path::Path;

use crate::spread::LayoutConfig;

/// Program name used in meaning origins.
pub const PROGRAM: &str = "ham";

const HAM_LW: &str = r#"@* Introduction. This program finds all Hamiltonian circuits of an
undirected graph, namely all cycles that pass through every vertex exactly
once. The graph is read from a file in the format of the Stanford GraphBase.
@c
#include "gb_graph.h" /* the GraphBase data structures */
#include "gb_save.h" /* |restore_graph| */

@ The main program reads the graph named on the command line, runs the
search, and reports how many circuits it found. The degree of each vertex
is kept in utility field~|u|.
@d deg u.I /* the number of neighbors still available */
@c
main(argc,argv)
  int argc; /* the number of command-line arguments */
  char *argv[]; /* an array of strings containing those arguments */
{
  Graph *g; /* the graph we will work on */
  register Vertex *t,*u,*v,*y; /* vertices of current interest */
  register Arc *a; /* the arc of current interest */
  long count=0,len=0; /* circuits found, vertices on the path */
  if (argc!=2||(g=restore_graph(argv[1]))==NULL) return 1;
  @<Set the degrees@>;
  @<Search for circuits@>;
  printf("%ld circuits\n",count);
  return 0;
}
@-deg@>
@$deg {ham}2 =\|u.\|I@>
@%@$u {GB\_GRAPH}9 \&{util}@>

@ At first the degree of each vertex is the number of its neighbors. We
visit the vertices in the order they appear in |g->vertices|, and for each
vertex~|v| we count the arcs of its list |v->arcs|, following the |next|
links until the list runs out. A vertex whose degree is less than~2 can
never lie on a circuit, and the search below will find no circuits at all
in a graph that has such a vertex.
@<Set the degrees@>=
for (v=g->vertices;v<g->vertices+g->n;v++)
  for (v->deg=0,a=v->arcs;a;a=a->next) v->deg++;

@ @-taken@> @-vert@>
@$taken {ham}4 =\|v.\|I@>
@%@$v {GB\_GRAPH}9 \&{util}@>
 @$v {ham}2 \&{register} \&{Vertex} $*$@>
A vertex is |taken| when it lies on the current path, and
|not_taken(vert)| tests the opposite.
@d taken v.I /* is this vertex on the current path? */
@d not_taken(vert) ((vert)->taken==0)
@<Clear the |taken| flags@>=
{
  register int d;
  for (d=0,v=g->vertices;d<g->n;d++,v++) v->taken=0;
}

@ The search starts at the first vertex, which lies on every circuit.
@<Search for circuits@>=
@<Clear the |taken| flags@>;
t=NULL;
v=g->vertices;
@<Move to |v|@>;
@<Explore all paths@>;

@ @-k@> @-t@> @-vert@> @-ark@>
@$vert {ham}6 =\|w.\|V@>
@$ark {ham}6 =\|x.\|A@>
@%@$w {GB\_GRAPH}9 \&{util}@>
  @$x {GB\_GRAPH}9 \&{util}@>
If the current path has |k| vertices, its last vertex is |t|. Every vertex
on the path points back to its predecessor in field |vert|, and its field
|ark| is the next arc to try from it.
@d vert w.V /* the previous vertex on the path */
@d ark x.A /* the next arc to try */

@ To move to vertex |v| we append it to the path and reduce the degrees of
its untaken neighbors. A neighbor |y| whose degree drops to~1 can only be
reached from |v|, so the search goes there at once.
@<Move to |v|@>=
advance: v->taken=1;
v->vert=t;
t=v;
len++;
y=NULL;
for (a=t->arcs;a;a=a->next)
  if (not_taken(a->tip)&&--a->tip->deg==1) y=a->tip;
if (y) {@+t->ark=NULL;@+v=y;@+goto advance;@+}
t->ark=t->arcs;

@ The main loop tries the untaken neighbors of~|t| or else backs up.
@<Explore all paths@>=
while (t) {
  register int d;
  for (d=0,a=t->arcs;a;a=a->next)
    if (not_taken(a->tip)) d++;
  if (d) @<Try the next arc@>@;
  else {
    @<Record a circuit if the path closes@>;
    @<Back up@>;
  }
}

@ To back up, we give the untaken neighbors of |t| their degrees back and
remove |t| from the path.
@<Back up@>=
for (a=t->arcs;a;a=a->next)
  if (not_taken(a->tip)) a->tip->deg++;
v=t;
t=v->vert;
v->taken=0;
len--;

@ We skip to the |next| arc that leads to an untaken vertex and |advance|
along it; the |ark| field remembers where to resume. If no such arc is
left, we back up.
@<Try the next arc@>=
{
  while (t->ark&&!not_taken(t->ark->tip)) t->ark=t->ark->next;
  if (t->ark) {@+v=t->ark->tip;@+a=t->ark;@+t->ark=a->next;@+goto advance;@+}
  @<Back up@>;
}

@ The path is a Hamiltonian circuit when it contains all |g->n| vertices
and its last vertex |t| is adjacent to the first, |g->vertices|. We print
each circuit by following the |vert| links back from |t|.
@<Record a circuit if the path closes@>=
if (len==g->n)
  for (a=t->arcs;a;a=a->next)
    if (a->tip==g->vertices) {
      count++;
      for (v=t;v;v=v->vert) printf(" %s",v->name);
      printf("\n");
    }
"#;

const HAM_BUX: &str = "@i gb_graph.hux\n@i gb_save.hux\n";

const GB_GRAPH_HUX: &str = r"@$util {GB\_GRAPH}8 =\&{union}@>
@$V {GB\_GRAPH}8 \&{struct} \\{vertex\_struct} $*$@>
@$A {GB\_GRAPH}8 \&{struct} \\{arc\_struct} $*$@>
@$I {GB\_GRAPH}8 \&{long}@>
@$Vertex {GB\_GRAPH}9 =\&{struct}@>
@$arcs {GB\_GRAPH}9 \&{Arc} $*$@>
@$name {GB\_GRAPH}9 \&{char} $*$@>
@$Arc {GB\_GRAPH}10 =\&{struct}@>
@$tip {GB\_GRAPH}10 \&{Vertex} $*$@>
@$next {GB\_GRAPH}10 \&{Arc} $*$@>
@$Graph {GB\_GRAPH}20 =\&{struct}@>
@$vertices {GB\_GRAPH}20 \&{Vertex} $*$@>
@$n {GB\_GRAPH}20 \&{long}@>
";

const GB_SAVE_HUX: &str = r"@$restore_graph {GB\_SAVE}4 \&{Graph} $*(\,)$@>
@$save_graph {GB\_SAVE}4 \&{long} (\,)@>
";

const SYSTEM_BUX: &str = r#"@$printf "<stdio.h>" \&{int} (\,)@>
@$fprintf "<stdio.h>" \&{int} (\,)@>
@$FILE "<stdio.h>" \zip@>
@$NULL "<stdio.h>" \zip@>
@$main "<C>" \&{int} (\,)@>
"#;

/// The literate source of HAM.
pub fn build_ham_corpus() -> String {
    HAM_LW.to_string()
}

/// Every file of the corpus, as (file name, contents).
pub fn corpus_files() -> Vec<(&'static str, String)> {
    vec![
        ("ham.lw", build_ham_corpus()),
        ("ham.bux", HAM_BUX.to_string()),
        ("gb_graph.hux", GB_GRAPH_HUX.to_string()),
        ("gb_save.hux", GB_SAVE_HUX.to_string()),
        ("system.bux", SYSTEM_BUX.to_string()),
    ]
}

pub fn write_corpus(dir: &Path) -> io::Result<()> {
    std::fs::create_dir_all(dir)?;
    for (name, contents) in corpus_files() {
        std::fs::write(dir.join(name), contents)?;
    }
    Ok(())
}

/// Page geometry under which HAM falls into its five spreads.
pub fn reference_layout() -> LayoutConfig {
    LayoutConfig {
        mini_columns: 2,
        mini_baseline: 1,
        page_capacity: 40,
        section_gap: 1,
        rule_allowance: 1,
        page_width: 80,
    }
}
