// closefields command-line driver. Every output is one JSON document carrying
// the resolved run configuration and the library version.

#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "closefields/run_config.hpp"
#include "closefields/tate.hpp"

using namespace closefields;

namespace {

struct Inputs {
  std::string out;
  bool json = false;
  std::string side = "F";
  std::string f_path, g_path;
  std::string module_path, xi_path, rho_path, br_path;
  int tate_i = 0;
  int dim_bound = kDefaultDimBound;
  bool serial = false;
};

const std::map<std::string, ExtKind> kCaseNames{{"unramified", ExtKind::Unramified}, {"ramified", ExtKind::Ramified}};
const std::map<std::string, PairMode> kModeNames{{"mixed-equal", PairMode::MixedEqual},
                                                 {"equal-equal", PairMode::EqualEqual}};

void add_common(CLI::App* cmd, RunConfig& cfg, Inputs& in) {
  cmd->add_option("--case", cfg.case_kind, "extension kind")->transform(CLI::CheckedTransformer(kCaseNames));
  cmd->add_option("--mode", cfg.pair_mode, "pair mode")->transform(CLI::CheckedTransformer(kModeNames));
  cmd->add_option("--p", cfg.p, "residue characteristic");
  cmd->add_option("--l", cfg.l, "coefficient characteristic and extension degree");
  cmd->add_option("--m", cfg.m, "closeness / congruence level");
  cmd->add_option("--n", cfg.n, "matrix rank");
  cmd->add_option("--window", cfg.window, "cocharacter spread bound");
  cmd->add_option("--seed", cfg.seed, "sampling seed");
  cmd->add_option("--samples", cfg.samples, "seeded random samples");
  cmd->add_option("--k", cfg.k, "coefficient field degree over F_l");
  cmd->add_option("--precision-cap", cfg.precision_cap, "largest working precision");
  cmd->add_option("--budget", cfg.budget, "enumeration budget");
  cmd->add_option("--out", in.out, "write the document to this path");
  cmd->add_flag("--json", in.json, "also print the document to standard output");
}

Json read_json(const std::string& path) {
  std::ifstream is(path);
  if (!is) fail(ErrorCode::ConfigInvalid, "cannot open " + path);
  try {
    return Json::parse(is);
  } catch (const std::exception& e) {
    fail(ErrorCode::ParseError, path + ": " + e.what());
  }
}

bool is_config_error(ErrorCode c) {
  switch (c) {
    case ErrorCode::ConfigInvalid:
    case ErrorCode::ParseError:
    case ErrorCode::SamePrime:
    case ErrorCode::NotMClose:
    case ErrorCode::GaloisConditionFailed:
    case ErrorCode::SpecMismatch:
    case ErrorCode::KindMismatch:
    case ErrorCode::SideMismatch:
    case ErrorCode::GeneratorNameMismatch:
    case ErrorCode::MissingAction:
    case ErrorCode::NotOrderL:
      return true;
    default:
      return false;
  }
}

class Runner {
 public:
  Runner(const RunConfig& cfg, const Inputs& in, std::string command) : cfg_(cfg), in_(in), command_(std::move(command)) {}

  int fields_build() {
    const auto& ext = extension();
    Json tower;
    tower["mode"] = to_string(cfg_.pair_mode);
    tower["m"] = ext.base.m;
    tower["e"] = ext.e;
    tower["f"] = cfg_.l / ext.e;
    for (const Side* s : {&ext.base.F, &ext.base.Fp, &ext.E, &ext.Ep}) tower[s->name] = side_to_json(*s);
    Json doc = header();
    doc["tower"] = std::move(tower);
    doc["pass"] = true;
    return emit(doc, true);
  }

  int cosets_enumerate() {
    const Side side = side_named(in_.side);
    const CocharWindow window{0, cfg_.window, true};
    Json per_mu = Json::array();
    Json labels = Json::array();
    for (const auto& mu : window.cochars(side.n)) {
      const auto ls = enumerate_labels(side, mu, cfg_.budget);
      per_mu.push_back(Json{{"mu", mu}, {"labels", ls.size()}, {"left_cosets", left_coset_count(side, mu)}});
      for (const auto& L : ls) labels.push_back(label_to_json(L));
    }
    Json doc = header();
    doc["side"] = side_to_json(side);
    doc["cochars"] = std::move(per_mu);
    doc["count"] = labels.size();
    doc["labels"] = std::move(labels);
    doc["pass"] = true;
    return emit(doc, true);
  }

  int hecke_convolve() {
    const HeckeElement f = load_element(in_.f_path);
    const HeckeElement g = load_element(in_.g_path);
    ConvolveOptions o;
    o.precision_cap = cfg_.precision_cap;
    const HeckeElement h = in_.serial ? convolve_serial(f, g, o) : convolve(f, g, o);
    return emit_result(hecke_to_json(h));
  }

  int hecke_brauer() {
    const HeckeElement f = load_element(in_.f_path);
    if (!is_extension_side(f.side)) fail(ErrorCode::SideMismatch, "Brauer restriction needs an element on E or E'");
    const auto& ext = extension();
    const Side& base = f.side.name == "E" ? ext.base.F : ext.base.Fp;
    return emit_result(hecke_to_json(brauer_restrict(f, base, std::nullopt, cfg_.budget)));
  }

  int hecke_sigma() {
    const HeckeElement f = load_element(in_.f_path);
    if (!is_extension_side(f.side)) fail(ErrorCode::SideMismatch, "sigma acts on E or E' only");
    return emit_result(hecke_to_json(sigma_act(f)));
  }

  int kaz_map_cmd() {
    const HeckeElement f = load_element(in_.f_path);
    const std::string& name = f.side.name;
    Transfer t = (name == "F" || name == "F'") ? kaz_F(close_pair()) : kaz_E(extension());
    if (name == "F'" || name == "E'") t = t.inverse();
    return emit_result(hecke_to_json(kaz_map(t, f)));
  }

  int check(const std::string& which) {
    const CheckOptions o = check_options(cfg_);
    Report r;
    if (which == "lemma-conv") {
      r = check_lemma_conv(side_named(in_.side), cfg_.l, o);
    } else if (which == "kaz-hom") {
      r = check_kaz_hom(close_pair(), cfg_.l, o);
    } else if (which == "galois-equivariance") {
      r = check_galois_equivariance(extension(), o);
    } else if (which == "main-diagram") {
      r = check_main_diagram(extension(), o);
    } else {
      r = check_brauer_multiplicative(extension(), o);
    }
    Json body = r.to_json();
    Json doc = header();
    doc["params"] = std::move(body["params"]);
    doc["samples"] = std::move(body["samples"]);
    doc["pass"] = r.pass;
    if (!r.pass) {
      for (const auto& s : doc["samples"])
        if (!s["equal"].get<bool>())
          std::cerr << "sample " << s["index"].get<size_t>() << " differs\n  input: " << s["input"].dump()
                    << "\n  lhs: " << s["lhs"].dump() << "\n  rhs: " << s["rhs"].dump() << "\n";
    }
    return emit(doc, r.pass);
  }

  int tate_cohomology_cmd() {
    if (in_.tate_i != 0 && in_.tate_i != 1) fail(ErrorCode::ConfigInvalid, "--i must be 0 or 1");
    const CyclicModule M = load_module(in_.module_path);
    validate(M);
    return emit_result(tate_to_json(tate_cohomology(M, in_.tate_i)));
  }

  int linkage_check_cmd() {
    const CyclicModule xi = load_module(in_.xi_path);
    const CyclicModule rho = load_module(in_.rho_path);
    std::optional<std::map<std::string, std::string>> br;
    if (!in_.br_path.empty()) {
      const Json j = read_json(in_.br_path);
      if (!j.is_object()) fail(ErrorCode::ParseError, "Brauer map must be an object of generator names");
      br.emplace();
      for (const auto& [k, v] : j.items()) {
        if (!v.is_string()) fail(ErrorCode::ParseError, "Brauer map values are generator names");
        (*br)[k] = v.get<std::string>();
      }
    }
    const LinkageResult res = linkage_check(xi, rho, br, in_.dim_bound);
    Json out;
    out["field_degree"] = res.field_degree;
    Json per_i = Json::array();
    for (int i = 0; i < 2; ++i)
      per_i.push_back(Json{{"i", i},
                           {"linked", to_string(res.linked[i])},
                           {"tate_dim", res.tate_dims[i]},
                           {"factor_dims", res.factor_dims[i]}});
    out["degrees"] = std::move(per_i);
    return emit_result(std::move(out));
  }

  int emit_error(const Error& e) {
    Json doc = header();
    doc["error"] = e.what();
    doc["pass"] = false;
    write(doc);
    std::cerr << e.what() << "\n";
    return is_config_error(e.code()) ? 2 : 1;
  }

 private:
  Json header() const {
    Json doc;
    doc["command"] = command_;
    doc["config"] = config_to_json(cfg_);
    doc["library_version"] = kLibraryVersion;
    return doc;
  }

  int emit_result(Json result) {
    Json doc = header();
    doc["result"] = std::move(result);
    doc["pass"] = true;
    return emit(doc, true);
  }

  void write(const Json& doc) const {
    const std::string text = doc.dump(2) + "\n";
    if (!in_.out.empty()) {
      std::ofstream os(in_.out);
      if (!os) fail(ErrorCode::ConfigInvalid, "cannot write " + in_.out);
      os << text;
    }
    if (in_.json || in_.out.empty()) std::cout << text;
  }

  int emit(const Json& doc, bool pass) {
    write(doc);
    if (!in_.out.empty() && !in_.json)
      std::cout << command_ << ": " << (pass ? "pass" : "FAIL") << " (" << in_.out << ")\n";
    return pass ? 0 : 1;
  }

  const ClosePair& close_pair() {
    if (!pair_) pair_ = build_close_pair(cfg_.pair_mode, cfg_.p, cfg_.m, cfg_.n);
    return *pair_;
  }

  const ExtensionPair& extension() {
    if (!ext_) ext_ = build_extension_pair(close_pair(), cfg_.case_kind, cfg_.l);
    return *ext_;
  }

  Side side_named(const std::string& name) {
    if (name == "F") return close_pair().F;
    if (name == "F'") return close_pair().Fp;
    if (name == "E") return extension().E;
    if (name == "E'") return extension().Ep;
    fail(ErrorCode::ConfigInvalid, "unknown side " + name + " (F, F', E or E')");
  }

  HeckeElement load_element(const std::string& path) {
    const Json j = read_json(path);
    if (!j.is_object() || !j.contains("side") || !j["side"].is_string())
      fail(ErrorCode::ParseError, path + ": Hecke element needs a side name");
    if (j.contains("l") && j["l"] != cfg_.l) fail(ErrorCode::ConfigInvalid, path + ": coefficient characteristic differs from --l");
    if (j.contains("k") && j["k"] != cfg_.k) fail(ErrorCode::ConfigInvalid, path + ": coefficient degree differs from --k");
    return hecke_from_json(side_named(j["side"].get<std::string>()), coeff_field(cfg_.l, cfg_.k), j);
  }

  CyclicModule load_module(const std::string& path) const {
    CyclicModule M = module_from_json(read_json(path));
    if (M.F().l() != cfg_.l)
      fail(ErrorCode::ConfigInvalid, path + ": coefficient characteristic differs from --l");
    return M;
  }

  RunConfig cfg_;
  Inputs in_;
  std::string command_;
  std::optional<ClosePair> pair_;
  std::optional<ExtensionPair> ext_;
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Hecke algebras over close local fields: transfer, Brauer restriction, linkage"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kLibraryVersion);
  RunConfig cfg;
  Inputs in;
  std::string command;
  std::function<int(Runner&)> action;

  auto leaf = [&](CLI::App* parent, const std::string& name, const std::string& desc, std::function<int(Runner&)> fn) {
    CLI::App* cmd = parent->add_subcommand(name, desc);
    add_common(cmd, cfg, in);
    const std::string full = parent->get_name() + " " + name;
    cmd->callback([&, full, fn] {
      command = full;
      action = fn;
    });
    return cmd;
  };

  CLI::App* fields = app.add_subcommand("fields", "field towers")->require_subcommand(1);
  leaf(fields, "build", "build F, F', E, E' and the level isomorphisms", [](Runner& r) { return r.fields_build(); });

  CLI::App* cosets = app.add_subcommand("cosets", "double cosets")->require_subcommand(1);
  leaf(cosets, "enumerate", "labels of K\\G/K in the window", [](Runner& r) { return r.cosets_enumerate(); })
      ->add_option("--side", in.side, "F, F', E or E'");

  CLI::App* hecke = app.add_subcommand("hecke", "Hecke algebra operations")->require_subcommand(1);
  CLI::App* conv = leaf(hecke, "convolve", "f * g", [](Runner& r) { return r.hecke_convolve(); });
  conv->add_option("--f", in.f_path, "left factor (JSON)")->required();
  conv->add_option("--g", in.g_path, "right factor (JSON)")->required();
  conv->add_flag("--serial", in.serial, "use the serial kernel");
  leaf(hecke, "brauer", "Brauer restriction of a sigma-invariant element", [](Runner& r) { return r.hecke_brauer(); })
      ->add_option("--f", in.f_path, "element on E or E' (JSON)")
      ->required();
  leaf(hecke, "sigma", "Galois action", [](Runner& r) { return r.hecke_sigma(); })
      ->add_option("--f", in.f_path, "element on E or E' (JSON)")
      ->required();

  CLI::App* kaz = app.add_subcommand("kaz", "Kazhdan transfer")->require_subcommand(1);
  leaf(kaz, "map", "transfer an element to the other field of its pair", [](Runner& r) { return r.kaz_map_cmd(); })
      ->add_option("--f", in.f_path, "element (JSON)")
      ->required();

  CLI::App* check = app.add_subcommand("check", "verification suites")->require_subcommand(1);
  for (const std::string which : {"kaz-hom", "galois-equivariance", "main-diagram", "lemma-conv", "brauer-multiplicative"}) {
    CLI::App* c = leaf(check, which, "run the " + which + " suite", [which](Runner& r) { return r.check(which); });
    if (which == "lemma-conv") c->add_option("--side", in.side, "F or F'");
    if (which == "main-diagram") c->add_flag("--all-orbits", cfg.all_orbit_sums, "every sigma-orbit sum of the window");
  }

  CLI::App* tate = app.add_subcommand("tate", "Tate cohomology")->require_subcommand(1);
  CLI::App* coh = leaf(tate, "cohomology", "Tate group of a module", [](Runner& r) { return r.tate_cohomology_cmd(); });
  coh->add_option("--module", in.module_path, "module (JSON)")->required();
  coh->add_option("--i", in.tate_i, "degree, 0 or 1");

  CLI::App* linkage = app.add_subcommand("linkage", "linkage of modules")->require_subcommand(1);
  CLI::App* lc = leaf(linkage, "check", "linkage of rho to Xi in degrees 0 and 1", [](Runner& r) { return r.linkage_check_cmd(); });
  lc->add_option("--xi", in.xi_path, "module over the sigma-invariant algebra (JSON)")->required();
  lc->add_option("--rho", in.rho_path, "module over the base algebra (JSON)")->required();
  lc->add_option("--br", in.br_path, "generator map Xi -> rho (JSON object)");
  lc->add_option("--dim-bound", in.dim_bound, "largest module dimension to decompose");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    cfg = resolve(cfg);
  } catch (const Error& e) {
    return Runner(cfg, in, command).emit_error(e);
  }
  Runner resolved(cfg, in, command);
  try {
    return action(resolved);
  } catch (const Error& e) {
    return resolved.emit_error(e);
  }
}
