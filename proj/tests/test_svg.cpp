#include <sstream>

#include <boost/property_tree/ptree.hpp>
#include <boost/property_tree/xml_parser.hpp>

#include "doctest.h"
#include "lace/eval.hpp"
#include "lace/model.hpp"
#include "lace/svg.hpp"
#include "lace/synth.hpp"

using namespace lace;
namespace pt = boost::property_tree;

namespace {

pt::ptree parse_xml(const std::string& text) {
  std::istringstream in(text);
  pt::ptree tree;
  pt::read_xml(in, tree);
  return tree;
}

int count_children(const pt::ptree& node, const std::string& name) {
  int n = 0;
  for (const auto& [k, v] : node) {
    if (k == name) ++n;
    n += count_children(v, name);
  }
  return n;
}

}  // namespace

TEST_CASE("viridis anchors") {
  CHECK(svg::hex_colour(0.0) == "#440154");
  CHECK(svg::hex_colour(1.0) == "#fde725");
  CHECK(svg::hex_colour(0.5) == "#21918c");
  CHECK(svg::hex_colour(-3) == "#440154");
  CHECK(svg::hex_colour(7) == "#fde725");
}

TEST_CASE("arrow svg is well formed with one arrow per cluster") {
  auto sc = builtin_scenario("curved-arc");
  sc.agents = 60;
  TrainParams tp;
  tp.k = 25;
  const auto model = train(generate(sc, 1.0), tp);
  const std::string text = svg::render_arrows(model);
  pt::ptree tree;
  REQUIRE_NOTHROW(tree = parse_xml(text));
  REQUIRE(tree.count("svg") == 1);
  CHECK(count_children(tree.get_child("svg"), "g") >= static_cast<int>(model.clusters().size()));
  std::size_t arrows = 0;
  for (std::size_t pos = 0; (pos = text.find("class=\"arrow\"", pos)) != std::string::npos; ++pos) ++arrows;
  CHECK(arrows == model.clusters().size());
  CHECK(text.find("probability of the most likely direction") != std::string::npos);
}

TEST_CASE("heatmap svg marks empty cells") {
  std::vector<TaskScore> s(2);
  s[0].gt_final_position = {0.5, 0.5};
  s[0].fde = 2;
  s[1].gt_final_position = {2.5, 1.5};
  s[1].fde = 6;
  const auto g = heatmap(s, 1.0, Region{0, 3, 0, 2});
  const std::string text = svg::render_heatmap(g);
  REQUIRE_NOTHROW(parse_xml(text));
  std::size_t cells = 0, empty = 0;
  for (std::size_t pos = 0; (pos = text.find("class=\"cell\"", pos)) != std::string::npos; ++pos) ++cells;
  for (std::size_t pos = 0; (pos = text.find("fill=\"none\"", pos)) != std::string::npos; ++pos) ++empty;
  CHECK(cells == 6);
  CHECK(empty >= 4);
  CHECK(text.find("mean FDE (m)") != std::string::npos);
}
