#pragma once

#include "kbviz/ast.hpp"
#include "kbviz/ast_json.hpp"
#include "kbviz/color.hpp"
#include "kbviz/diagnostic.hpp"
#include "kbviz/eval.hpp"
#include "kbviz/features.hpp"
#include "kbviz/hypergraph.hpp"
#include "kbviz/kb_model.hpp"
#include "kbviz/layout.hpp"
#include "kbviz/lexer.hpp"
#include "kbviz/parser.hpp"
#include "kbviz/svg.hpp"
#include "kbviz/workspace.hpp"
