"""Graph representation helpers: lazy-walk algebra, subgraphs and file I/O."""

from fairgen.graph.core import conductance as conductance
from fairgen.graph.core import connected_components as connected_components
from fairgen.graph.core import ego_subgraph as ego_subgraph
from fairgen.graph.core import transition_matrix as transition_matrix
from fairgen.graph.io import load_edge_list as load_edge_list
from fairgen.graph.io import load_labels as load_labels
from fairgen.graph.io import load_protected as load_protected
from fairgen.graph.io import write_edge_list as write_edge_list
