// mbw: command-line front end for the matroid / branch-width toolkit.

#include <fstream>
#include <iostream>
#include <iterator>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "mbw/errors.hpp"
#include "mbw/grammar.hpp"
#include "mbw/pipeline.hpp"
#include "mbw/text_cursor.hpp"

using namespace mbw;
using nlohmann::json;

namespace {

std::string read_file(const std::string& path) {
  if (path == "-") return {std::istreambuf_iterator<char>(std::cin), std::istreambuf_iterator<char>()};
  std::ifstream in(path);
  if (!in) throw InputError("cannot read '" + path + "'");
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

// Runs f, prefixing input errors with the file they came from.
template <class F>
auto from_file(const std::string& path, F f) -> decltype(f(std::string{})) {
  const std::string text = read_file(path);
  try {
    return f(text);
  } catch (const InputError& e) {
    throw InputError(path + ": " + e.what());
  }
}

Matroid load_matroid(const std::string& path) {
  return from_file(path, [](const std::string& t) { return parse_matroid(t); });
}

json set_json(ElementSet s) {
  json out = json::array();
  for (int e : s.elements()) out.push_back(e + 1);
  return out;
}

json tree_json(const DecompositionTree& d, int v) {
  const auto& n = d.node(v);
  if (n.left < 0) return {{"leaf", n.element + 1}};
  return {{"left", tree_json(d, n.left)}, {"right", tree_json(d, n.right)}};
}

json matrix_json(const GfMatrix& m) {
  json rows = json::array();
  for (std::size_t r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (std::size_t c = 0; c < m.cols(); ++c) row.push_back(static_cast<int>(m(r, c)));
    rows.push_back(row);
  }
  return rows;
}

json label_json(const CharacteristicLabel& l) {
  return {{"widths", l.widths}, {"rows", matrix_json(l.matrix)}, {"text", format_label(l)}};
}

json enhanced_json(const EnhancedTree& e, int v) {
  const auto& n = e.shape().node(v);
  json out{{"label", label_json(e.label(v))}};
  if (n.left < 0) {
    out["leaf"] = n.element + 1;
  } else {
    out["left"] = enhanced_json(e, n.left);
    out["right"] = enhanced_json(e, n.right);
  }
  return out;
}

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> out;
  std::stringstream in(text);
  for (std::string part; std::getline(in, part, sep);)
    if (!part.empty()) out.push_back(part);
  return out;
}

struct FormulaArg {
  FormulaPtr phi;
  std::vector<std::string> free;
};

FormulaArg load_formula(const std::string& text, const std::string& free) {
  if (text == "circuit" || text == "connected" || text == "a_circuit") return {builtin(text), builtin_free_vars(text)};
  auto vars = split(free, ',');
  return {parse_msom(text, vars), vars};
}

// NAME=1,2,3 pairs.
std::map<std::string, ElementSet> named_sets(const std::vector<std::string>& args, int n) {
  std::map<std::string, ElementSet> out;
  for (const auto& a : args) {
    const auto eq = a.find('=');
    if (eq == std::string::npos || eq == 0) throw InputError("expected NAME=ids, got '" + a + "'");
    out[a.substr(0, eq)] = parse_element_list(a.substr(eq + 1), n);
  }
  return out;
}

Decomposition decompose(const Matroid& m, int t) {
  if (m.size() <= 10) return exact_decomposition(m);
  if (t < 0) throw InputError("more than 10 elements: give --width for the greedy search");
  auto d = greedy_decomposition(m, t);
  if (!d) throw LimitError("no decomposition of width at most " + std::to_string(3 * t) + " found");
  return *d;
}

void emit(bool as_json, const json& j, const std::string& text) {
  if (as_json)
    std::cout << j.dump(2) << "\n";
  else
    std::cout << text;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Matroids of bounded branch-width: decompositions, enhanced trees, MSO model checking"};
  app.require_subcommand(1);
  std::string format = "text";
  app.add_option("--format", format, "Output format")->check(CLI::IsMember({"text", "json"}));

  std::string matroid_file, tree_file, set_text, formula_text, free_text;
  std::vector<std::string> set_args, elem_args, color_args;
  int width = -1, field = 2, n_max = 30;
  long long limit = -1;

  auto* matroid = app.add_subcommand("matroid", "Independence queries on a matroid file");
  matroid->require_subcommand(1);
  auto* mcheck_set = matroid->add_subcommand("check", "Is a set independent?");
  mcheck_set->add_option("matroid", matroid_file)->required();
  mcheck_set->add_option("--set", set_text, "1-based ids, e.g. 1,2,4")->required();
  auto* mcircuits = matroid->add_subcommand("circuits", "List all circuits");
  mcircuits->add_option("matroid", matroid_file)->required();

  auto* decomp = app.add_subcommand("decomp", "Branch decompositions");
  decomp->require_subcommand(1);
  auto* dfind = decomp->add_subcommand("find", "Exact up to 10 elements, greedy beyond");
  dfind->add_option("matroid", matroid_file)->required();
  dfind->add_option("--width", width, "Width bound (needed by the greedy search)");
  auto* dverify = decomp->add_subcommand("verify", "Width of a given decomposition");
  dverify->add_option("matroid", matroid_file)->required();
  dverify->add_option("tree", tree_file)->required();
  dverify->add_option("--width", width, "Fail when the width exceeds this bound");

  auto* enhance = app.add_subcommand("enhance", "Build the enhanced tree of a represented matroid");
  enhance->add_option("matroid", matroid_file)->required();
  enhance->add_option("--tree", tree_file, "Decomposition (default: computed)");
  enhance->add_option("--width", width, "Width bound t (default: the decomposition's width)");

  auto add_formula_options = [&](CLI::App* sub) {
    sub->add_option("matroid", matroid_file)->required();
    sub->add_option("--formula", formula_text, "Formula text or circuit|connected|a_circuit")->required();
    sub->add_option("--free", free_text, "Free variables of a formula text, comma separated");
    sub->add_option("--width", width, "Width bound t (default: exact width up to 10 elements)");
    sub->add_option("--color", color_args, "Color sets, e.g. A=1,2");
  };
  auto* mcheck = app.add_subcommand("mcheck", "Model check a formula through the tree pipeline");
  add_formula_options(mcheck);
  mcheck->add_option("--set", set_args, "Free set variables, e.g. X=1,2");
  mcheck->add_option("--elem", elem_args, "Free element variables, e.g. x=3");
  auto* enumerate = app.add_subcommand("enum", "Stream every satisfying assignment");
  add_formula_options(enumerate);
  enumerate->add_option("--limit", limit, "Stop after this many solutions");

  auto* spectrum_cmd = app.add_subcommand("spectrum", "Sizes of matroids of branch-width <= t satisfying a sentence");
  spectrum_cmd->add_option("--formula", formula_text, "Closed formula")->required();
  spectrum_cmd->add_option("--width", width, "Width bound t")->required();
  spectrum_cmd->add_option("--field", field, "Field size p");
  spectrum_cmd->add_option("--max", n_max, "Largest size checked");

  std::string label_file, left_file, right_file;
  auto* grammar = app.add_subcommand("grammar", "Boundaried parse trees");
  grammar->require_subcommand(1);
  auto* gcompose = grammar->add_subcommand("compose", "Compose two boundaried matroids with a 3-partitioned label");
  gcompose->add_option("label", label_file, "`field p` + [N: ...], or [P: ...]")->required();
  gcompose->add_option("left", left_file)->required();
  gcompose->add_option("right", right_file)->required();
  auto* gparse = grammar->add_subcommand("parse", "The boundaried matroid a parse tree parses");
  gparse->add_option("tree", tree_file)->required();
  auto* gcheck = grammar->add_subcommand("check", "Validate a parse tree, optionally test a set");
  gcheck->add_option("tree", tree_file)->required();
  gcheck->add_option("--set", set_text, "1-based ids of parsed elements");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }
  const bool as_json = format == "json";

  try {
    if (*mcheck_set) {
      const Matroid m = load_matroid(matroid_file);
      const ElementSet s = parse_element_list(set_text, m.size());
      const bool indep = is_independent(m, s);
      emit(as_json, {{"set", set_json(s)}, {"independent", indep}}, indep ? "independent\n" : "dependent\n");
    } else if (*mcircuits) {
      const Matroid m = load_matroid(matroid_file);
      const auto cs = circuits(m);
      json j = json::array();
      std::string text;
      for (ElementSet c : cs) {
        j.push_back(set_json(c));
        text += to_string(c) + "\n";
      }
      emit(as_json, {{"circuits", j}}, text);
    } else if (*dfind) {
      const Matroid m = load_matroid(matroid_file);
      const auto d = decompose(m, width);
      if (width >= 0 && d.width > width)
        throw LimitError("branch-width " + std::to_string(d.width) + " exceeds the bound " + std::to_string(width));
      emit(as_json, {{"width", d.width}, {"tree", tree_json(d.tree, d.tree.root())}, {"text", format_tree(d.tree)}},
           format_tree(d.tree) + "\nwidth " + std::to_string(d.width) + "\n");
    } else if (*dverify) {
      const Matroid m = load_matroid(matroid_file);
      const auto d = from_file(tree_file, [](const std::string& t) { return parse_tree(t); });
      check_labeling(d, m.size());
      const int w = mbw::width(m, d);
      emit(as_json, {{"width", w}}, "width " + std::to_string(w) + "\n");
      if (width >= 0 && w > width) {
        std::cerr << "mbw: width " << w << " exceeds the bound " << width << "\n";
        return 1;
      }
    } else if (*enhance) {
      const Matroid m = load_matroid(matroid_file);
      const GfMatrix& a = representation(m);
      DecompositionTree d;
      if (tree_file.empty()) {
        d = decompose(m, width).tree;
      } else {
        d = from_file(tree_file, [](const std::string& t) { return parse_tree(t); });
        check_labeling(d, m.size());
      }
      const auto e = build_enhanced(a, d, width >= 0 ? width : mbw::width(m, d));
      emit(as_json, {{"field", e.field().p()}, {"tree", enhanced_json(e, d.root())}}, format_enhanced(e));
    } else if (*mcheck || *enumerate) {
      const Matroid m = load_matroid(matroid_file);
      const auto f = load_formula(formula_text, free_text);
      const auto colors = named_sets(color_args, m.size());
      std::vector<std::string> color_names;
      for (const auto& [name, s] : colors) color_names.push_back(name);
      for (const auto& c : colors_used(*f.phi))
        if (!colors.count(c)) throw InputError("formula uses color " + c + " but no --color " + c + "=... was given");
      const int t = width >= 0 ? width : decompose(m, -1).width;
      ModelChecker checker(representation(m).field(), t, color_names);
      const auto prepared = checker.prepare(representation(m), colors);
      if (*mcheck) {
        Assignment a;
        a.sets = named_sets(set_args, m.size());
        for (const auto& [name, s] : named_sets(elem_args, m.size())) {
          if (s.size() != 1) throw InputError("element variable " + name + " needs exactly one id");
          a.elements[name] = s.min();
        }
        for (const auto& v : f.free)
          if (!a.sets.count(v) && !a.elements.count(v)) throw InputError("no value for free variable " + v);
        const bool r = checker.check(prepared, *f.phi, a);
        emit(as_json, {{"result", r}, {"width", t}}, r ? "true\n" : "false\n");
      } else {
        long long count = 0;
        checker.enumerate(prepared, *f.phi, f.free, [&](const std::vector<ElementSet>& tuple) {
          if (as_json) {
            json j;
            for (std::size_t i = 0; i < tuple.size(); ++i) j[f.free[i]] = set_json(tuple[i]);
            std::cout << j.dump() << std::endl;
          } else {
            std::string line;
            for (std::size_t i = 0; i < tuple.size(); ++i) {
              if (f.free.size() > 1) line += (i ? " " : "") + f.free[i] + "=";
              line += to_string(tuple[i]);
            }
            std::cout << line << std::endl;
          }
          return ++count != limit;
        });
      }
    } else if (*spectrum_cmd) {
      const auto phi = parse_msom(formula_text);
      const auto set = matroid_spectrum(*phi, width, Field(field), n_max);
      const auto period = detect_period(set, n_max);
      json sizes = json::array();
      std::string text = "sizes";
      for (int n = 1; n <= n_max; ++n)
        if (set[static_cast<std::size_t>(n)]) {
          sizes.push_back(n);
          text += " " + std::to_string(n);
        }
      text += "\n";
      json p = nullptr;
      if (period) {
        p = {{"a", period->first}, {"b", period->second}};
        text += "period a=" + std::to_string(period->first) + " b=" + std::to_string(period->second) + "\n";
      } else {
        text += "no period within the window\n";
      }
      emit(as_json, {{"sizes", sizes}, {"period", p}, {"max", n_max}}, text);
    } else if (*gcompose) {
      const std::string label = read_file(label_file);
      if (label.find("[P:") != std::string::npos) {
        const auto n = from_file(label_file, [](const std::string& t) { return parse_partitioned(t); });
        auto load = [](const std::string& path) {
          return from_file(path, [](const std::string& t) { return parse_boundaried_explicit(t); });
        };
        const auto out = odot(n, load(left_file), load(right_file));
        emit(as_json, {{"ground", out.matroid.size()}, {"boundary", out.boundary}, {"text", format_boundaried_explicit(out)}},
             format_boundaried_explicit(out));
      } else {
        const auto n = from_file(label_file, [](const std::string& t) {
          TextCursor in(t);
          in.expect_word("field");
          const Field f(static_cast<int>(in.integer()));
          auto l = parse_label(in, f);
          if (!in.at_end()) in.fail("trailing text after the label");
          return l;
        });
        auto load = [](const std::string& path) {
          return from_file(path, [](const std::string& t) { return parse_boundaried_matrix(t); });
        };
        const auto out = odot(n, load(left_file), load(right_file));
        emit(as_json, {{"rows", matrix_json(out.matrix)}, {"boundary", out.boundary}}, format_boundaried_matrix(out));
      }
    } else if (*gparse || *gcheck) {
      const auto t = from_file(tree_file, [](const std::string& s) { return parse_parse_tree(s); });
      if (*gparse) {
        if (t.abstract() || t.empty()) {
          const auto out = parse_explicit(t);
          emit(as_json, {{"ground", out.matroid.size()}, {"boundary", out.boundary}, {"text", format_boundaried_explicit(out)}},
               format_boundaried_explicit(out));
        } else {
          // internal columns by element id, then the boundary
          const auto b = parse_boundaried(t);
          const GfMatrix in = parsed_matrix(t);
          std::vector<GfVector> cols;
          for (std::size_t c = 0; c < in.cols(); ++c) cols.push_back(in.column(c));
          BoundariedMatrix out{GfMatrix(t.field, 0, 0), {}};
          for (int c : b.boundary) {
            out.boundary.push_back(static_cast<int>(cols.size()));
            cols.push_back(b.matrix.column(static_cast<std::size_t>(c)));
          }
          out.matrix = GfMatrix::from_columns(t.field, b.matrix.rows(), cols);
          emit(as_json, {{"rows", matrix_json(out.matrix)}, {"boundary", out.boundary}}, format_boundaried_matrix(out));
        }
      } else {
        const int n = t.abstract() ? parse_explicit(t).matroid.size() : static_cast<int>(t.shape.leaf_count());
        json j{{"valid", true}, {"elements", t.empty() ? 0 : n}};
        std::string text = "valid, " + std::to_string(t.empty() ? 0 : n) + " elements\n";
        if (!set_text.empty()) {
          const ElementSet s = parse_element_list(set_text, t.empty() ? 0 : n);
          const bool dep = t.abstract() ? is_dependent_parse(t, s) : !is_independent(Matroid(VectorMatroid(parsed_matrix(t))), s);
          j["dependent"] = dep;
          text += dep ? "dependent\n" : "independent\n";
        }
        emit(as_json, j, text);
      }
    }
  } catch (const InputError& e) {
    std::cerr << "mbw: " << e.what() << "\n";
    return 2;
  } catch (const LimitError& e) {
    std::cerr << "mbw: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
