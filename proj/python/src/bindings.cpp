#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "hdglue/error.hpp"
#include "hdglue/experiment.hpp"
#include "hdglue/fleet.hpp"
#include "hdglue/glue.hpp"
#include "hdglue/hil.hpp"
#include "hdglue/model_io.hpp"
#include "hdglue/online.hpp"
#include "hdglue/synthetic.hpp"

namespace py = pybind11;
using namespace hdglue;

namespace {

using FloatArray = py::array_t<float, py::array::c_style | py::array::forcecast>;
using LabelArray = py::array_t<Label, py::array::c_style | py::array::forcecast>;

PyObject* g_error = nullptr;

py::bytes to_py_bytes(const std::vector<std::uint8_t>& v) {
  return py::bytes(reinterpret_cast<const char*>(v.data()), v.size());
}

std::vector<std::uint8_t> from_py_bytes(const py::bytes& b) {
  const std::string s = b;
  return {s.begin(), s.end()};
}

std::span<const float> as_row(const FloatArray& a) {
  if (a.ndim() != 1) throw Error(ErrorKind::kLengthMismatch, "embedding must be one-dimensional");
  return {a.data(), static_cast<std::size_t>(a.shape(0))};
}

EmbeddingDataset make_dataset(const FloatArray& x, const LabelArray& y) {
  if (x.ndim() != 2 || y.ndim() != 1) throw Error(ErrorKind::kLengthMismatch, "expected X of shape (n, d) and y of shape (n,)");
  if (x.shape(0) != y.shape(0)) throw Error(ErrorKind::kLengthMismatch, "X and y have different row counts");
  std::vector<float> values(x.data(), x.data() + x.size());
  std::vector<Label> labels(y.data(), y.data() + y.size());
  return EmbeddingDataset(static_cast<std::uint32_t>(x.shape(1)), std::move(values), std::move(labels));
}

template <typename T>
py::array_t<T> copy_array(std::span<const T> src) {
  py::array_t<T> out(static_cast<py::ssize_t>(src.size()));
  std::copy(src.begin(), src.end(), out.mutable_data());
  return out;
}

py::dict scores_dict(const std::vector<ClassScore>& scores) {
  py::dict d;
  for (const ClassScore& s : scores) d[py::int_(s.label)] = s.similarity;
  return d;
}

ModelConfig model_config(const EmbeddingDataset& data, std::uint64_t seed, std::uint32_t dim, std::uint32_t levels) {
  return ModelConfig{seed, dim, levels, data.dim()};
}

py::object wrap(AnyModel&& m) {
  return std::visit([](auto&& v) -> py::object {
    using T = std::decay_t<decltype(v)>;
    return py::cast(std::make_shared<T>(std::move(v)));
  }, std::move(m));
}

std::vector<const EmbeddingDataset*> pointers(const std::vector<std::shared_ptr<EmbeddingDataset>>& sets) {
  std::vector<const EmbeddingDataset*> out;
  for (const auto& s : sets) out.push_back(s.get());
  return out;
}

py::tuple split_tuple(SyntheticSplit s) {
  return py::make_tuple(std::make_shared<EmbeddingDataset>(std::move(s.train)),
                        std::make_shared<EmbeddingDataset>(std::move(s.test)));
}

}  // namespace

PYBIND11_MODULE(_hdglue, m) {
  m.doc() = "Hyperdimensional glue for combining pretrained classifiers";
  m.attr("__version__") = HDGLUE_VERSION;

  g_error = PyErr_NewException("hdglue.HdglueError", PyExc_RuntimeError, nullptr);
  m.attr("HdglueError") = py::handle(g_error);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::object inst = py::reinterpret_steal<py::object>(PyObject_CallFunction(g_error, "s", e.what()));
      inst.attr("kind") = std::string(to_string(e.kind()));
      PyErr_SetObject(g_error, inst.ptr());
    }
  });

  py::class_<Hypervector>(m, "Hypervector")
      .def(py::init<std::uint32_t>(), py::arg("dim"))
      .def_property_readonly("dim", &Hypervector::dim)
      .def("popcount", &Hypervector::popcount)
      .def("bit", [](const Hypervector& v, std::size_t i) {
        if (i >= v.dim()) throw py::index_error("bit index out of range");
        return v.bit(i);
      })
      .def("words", [](const Hypervector& v) {
        return copy_array(v.words());
      })
      .def("__xor__", [](const Hypervector& a, const Hypervector& b) { return bind(a, b); })
      .def("__eq__", [](const Hypervector& a, const Hypervector& b) { return a == b; })
      .def("__len__", &Hypervector::dim);

  m.def("random_hypervector",
        [](std::uint64_t seed, const std::string& ns, std::uint64_t index, std::uint32_t dim) {
          return random_hypervector(SeedContext(seed, ns, index), dim);
        },
        py::arg("seed"), py::arg("namespace"), py::arg("index"), py::arg("dim") = kDefaultDim);
  m.def("bind", &bind);
  m.def("hamming", &hamming);
  m.def("similarity", &similarity);

  py::class_<EmbeddingDataset, std::shared_ptr<EmbeddingDataset>>(m, "EmbeddingDataset")
      .def(py::init(&make_dataset), py::arg("X"), py::arg("y"))
      .def("__len__", &EmbeddingDataset::size)
      .def_property_readonly("d", &EmbeddingDataset::dim)
      .def_property_readonly("X", [](const EmbeddingDataset& ds) {
        py::array_t<float> out({static_cast<py::ssize_t>(ds.size()), static_cast<py::ssize_t>(ds.dim())});
        std::copy(ds.values().begin(), ds.values().end(), out.mutable_data());
        return out;
      })
      .def_property_readonly("y", [](const EmbeddingDataset& ds) {
        return copy_array(ds.labels());
      })
      .def("classes", &EmbeddingDataset::classes)
      .def("__eq__", [](const EmbeddingDataset& a, const EmbeddingDataset& b) { return a == b; });

  m.def("load_dataset", [](const std::filesystem::path& p) { return std::make_shared<EmbeddingDataset>(load_dataset(p)); });
  m.def("save_dataset", [](const EmbeddingDataset& d, const std::filesystem::path& p) { save_dataset(d, p); });

  py::class_<HilModel, std::shared_ptr<HilModel>>(m, "HilModel")
      .def_static(
          "train",
          [](const EmbeddingDataset& data, std::uint64_t seed, std::uint32_t dim, std::uint32_t levels) {
            return std::make_shared<HilModel>(HilModel::train(data, model_config(data, seed, dim, levels)));
          },
          py::arg("data"), py::arg("seed"), py::arg("dim") = kDefaultDim, py::arg("levels") = kDefaultLevels,
          py::call_guard<py::gil_scoped_release>())
      .def("update", &HilModel::update, py::arg("data"), py::call_guard<py::gil_scoped_release>())
      .def("predict",
           [](const HilModel& h, const FloatArray& x) {
             const Prediction p = h.predict(as_row(x));
             return py::make_tuple(p.label, scores_dict(p.scores));
           })
      .def("predict_batch",
           [](const HilModel& h, const EmbeddingDataset& data) {
             py::array_t<Label> out(static_cast<py::ssize_t>(data.size()));
             for (std::size_t i = 0; i < data.size(); ++i) out.mutable_at(i) = h.predict(data.row(i)).label;
             return out;
           })
      .def("labels", &HilModel::labels)
      .def_property_readonly("seed", [](const HilModel& h) { return h.config().seed; })
      .def_property_readonly("dim", [](const HilModel& h) { return h.config().dim; })
      .def_property_readonly("example_count", &HilModel::example_count)
      .def_property_readonly("classification_vector", &HilModel::classification_vector)
      .def("to_bytes", [](const HilModel& h) { return to_py_bytes(serialize(h)); })
      .def_static("from_bytes", [](const py::bytes& b) { return std::make_shared<HilModel>(parse_hil(from_py_bytes(b))); })
      .def("save", [](const HilModel& h, const std::filesystem::path& p) { save_model(h, p); })
      .def("__eq__", [](const HilModel& a, const HilModel& b) { return a == b; });

  py::class_<GlueModel, std::shared_ptr<GlueModel>>(m, "GlueModel")
      .def(py::init<std::uint64_t, std::uint32_t>(), py::arg("seed"), py::arg("dim") = kDefaultDim)
      .def(
          "add_model",
          [](GlueModel& g, const HilModel& h, double weight) {
            return g.add_model(std::make_shared<const HilModel>(h), Weight::from_double(weight));
          },
          py::arg("model"), py::arg("weight") = 1.0)
      .def("remove_model", &GlueModel::remove_model)
      .def("restore_model", &GlueModel::restore_model)
      .def("replace_model",
           [](GlueModel& g, MemberSlot slot, const HilModel& h) { g.replace_model(slot, std::make_shared<const HilModel>(h)); })
      .def("set_weight", [](GlueModel& g, MemberSlot slot, double w) { g.set_weight(slot, Weight::from_double(w)); })
      .def("compress",
           [](GlueModel& g, const std::vector<MemberSlot>& slots, double w) {
             return g.compress(slots, Weight::from_double(w));
           },
           py::arg("slots"), py::arg("weight") = 1.0)
      .def(
          "predict",
          [](const GlueModel& g, const std::map<MemberSlot, FloatArray>& embeddings,
             std::optional<std::vector<MemberSlot>> available) {
            MemberEmbeddings e;
            for (const auto& [slot, arr] : embeddings) e[slot] = as_row(arr);
            std::optional<std::span<const MemberSlot>> avail;
            if (available) avail = std::span<const MemberSlot>(*available);
            const GluePrediction p = g.predict(e, avail);
            return py::make_tuple(p.label, scores_dict(p.scores));
          },
          py::arg("embeddings"), py::arg("available") = py::none())
      .def("active_slots", &GlueModel::active_slots)
      .def("weight", [](const GlueModel& g, MemberSlot slot) { return g.member(slot).weight.value(); })
      .def_property_readonly("seed", &GlueModel::seed)
      .def_property_readonly("dim", &GlueModel::dim)
      .def_property_readonly("glue_vector", &GlueModel::glue_vector)
      .def("to_bytes", [](const GlueModel& g) { return to_py_bytes(serialize(g)); })
      .def_static("from_bytes", [](const py::bytes& b) { return std::make_shared<GlueModel>(parse_glue(from_py_bytes(b))); })
      .def("save", [](const GlueModel& g, const std::filesystem::path& p) { save_model(g, p); });

  py::class_<ErrorFleet, std::shared_ptr<ErrorFleet>>(m, "ErrorFleet")
      .def_static(
          "correct",
          [](const EmbeddingDataset& data, std::uint64_t seed, std::uint32_t dim, std::uint32_t levels,
             std::uint32_t max_rounds, bool memory, double threshold) {
            return std::make_shared<ErrorFleet>(ErrorFleet::correct(data, model_config(data, seed, dim, levels),
                                                                    FleetOptions{max_rounds, memory, threshold}));
          },
          py::arg("data"), py::arg("seed"), py::arg("dim") = kDefaultDim, py::arg("levels") = kDefaultLevels,
          py::arg("max_rounds") = 8, py::arg("memory") = false, py::arg("threshold") = 0.95,
          py::call_guard<py::gil_scoped_release>())
      .def("predict",
           [](const ErrorFleet& f, const FloatArray& x) {
             const FleetPrediction p = f.predict(as_row(x));
             return py::make_tuple(p.label, p.provenance);
           })
      .def_property_readonly("rounds", [](const ErrorFleet& f) { return f.rounds().size(); })
      .def_property_readonly("memory_size", [](const ErrorFleet& f) { return f.memory().size(); })
      .def("weights", &ErrorFleet::normalized_weights)
      .def("training_trace",
           [](const ErrorFleet& f) {
             std::vector<std::uint64_t> correct;
             for (const FleetStep& s : f.trace()) {
               if (s.accepted) correct.push_back(s.fleet_correct);
             }
             return correct;
           })
      .def("to_bytes", [](const ErrorFleet& f) { return to_py_bytes(serialize(f)); })
      .def_static("from_bytes", [](const py::bytes& b) { return std::make_shared<ErrorFleet>(parse_fleet(from_py_bytes(b))); })
      .def("save", [](const ErrorFleet& f, const std::filesystem::path& p) { save_model(f, p); });

  py::class_<OnlineSession, std::shared_ptr<OnlineSession>>(m, "OnlineSession")
      .def(py::init([](const std::string& schedule, std::uint64_t seed, std::uint32_t dim, std::uint32_t levels,
                       std::uint32_t d, std::uint32_t test_per_class) {
             return std::make_shared<OnlineSession>(SessionConfig{seed, dim, levels, d, test_per_class},
                                                    parse_schedule(schedule));
           }),
           py::arg("schedule"), py::arg("seed"), py::arg("dim") = kDefaultDim, py::arg("levels") = kDefaultLevels,
           py::arg("d") = 32, py::arg("test_per_class") = 100)
      .def("run", &OnlineSession::run, py::arg("limit") = py::none(), py::call_guard<py::gil_scoped_release>())
      .def("step", &OnlineSession::step)
      .def_property_readonly("done", &OnlineSession::done)
      .def_property_readonly("position", &OnlineSession::position)
      .def("evaluate",
           [](const OnlineSession& s) {
             const HistoryRow r = s.evaluate();
             py::dict per;
             for (const auto& [label, acc] : r.per_class) per[py::int_(label)] = acc ? py::cast(*acc) : py::none();
             return py::make_tuple(r.overall, per);
           })
      .def("glue", [](const OnlineSession& s) { return std::make_shared<GlueModel>(s.glue()); })
      .def("history_csv", &OnlineSession::history_csv)
      .def("history_jsonl", &OnlineSession::history_jsonl)
      .def("to_bytes", [](const OnlineSession& s) { return to_py_bytes(serialize(s)); })
      .def_static("from_bytes",
                  [](const py::bytes& b) { return std::make_shared<OnlineSession>(parse_session(from_py_bytes(b))); })
      .def("save", [](const OnlineSession& s, const std::filesystem::path& p) { save_model(s, p); });

  m.def(
      "staged_schedule",
      [](std::uint32_t models, std::uint32_t classes_per_model, std::uint32_t n_per_class) {
        return schedule_to_json(staged_schedule(models, classes_per_model, n_per_class));
      },
      py::arg("models") = 5, py::arg("classes_per_model") = 2, py::arg("n_per_class") = 100);

  m.def("model_kind", [](const py::bytes& b) { return std::string(to_string(peek_kind(from_py_bytes(b)))); });
  m.def("parse_model", [](const py::bytes& b) { return wrap(parse_model(from_py_bytes(b))); });
  m.def("load_model", [](const std::filesystem::path& p) { return wrap(load_model(p)); });

  m.def(
      "gen_synthetic",
      [](std::vector<Label> classes, std::uint32_t d, double noise, std::uint64_t seed, std::uint32_t n_train,
         std::uint32_t n_test) {
        return split_tuple(gen_synthetic(default_network_spec(std::move(classes), d, noise, seed), n_train, n_test));
      },
      py::arg("classes"), py::arg("d") = 32, py::arg("noise") = 1.0, py::arg("seed") = 0, py::arg("n_train") = 100,
      py::arg("n_test") = 100);

  m.def(
      "make_specialist_data",
      [](std::uint64_t seed, std::uint32_t networks, std::uint32_t classes, std::uint32_t d, std::uint32_t n_train,
         std::uint32_t n_test) {
        SpecialistSetup setup;
        setup.networks = networks;
        setup.classes = classes;
        setup.d = d;
        setup.n_train = n_train;
        setup.n_test = n_test;
        py::list out;
        for (SyntheticSplit& s : make_specialist_data(seed, setup).splits) out.append(split_tuple(std::move(s)));
        return out;
      },
      py::arg("seed"), py::arg("networks") = 5, py::arg("classes") = 10, py::arg("d") = 32, py::arg("n_train") = 100,
      py::arg("n_test") = 100);

  m.def("evaluate_hil", [](const HilModel& h, const EmbeddingDataset& test) { return evaluate_hil(h, test).overall; });
  m.def(
      "evaluate_glue",
      [](const GlueModel& g, const std::vector<MemberSlot>& slots,
         const std::vector<std::shared_ptr<EmbeddingDataset>>& tests, std::optional<std::vector<MemberSlot>> available) {
        const auto ptrs = pointers(tests);
        std::optional<std::span<const MemberSlot>> avail;
        if (available) avail = std::span<const MemberSlot>(*available);
        return evaluate_glue(g, slots, ptrs, avail).overall;
      },
      py::arg("glue"), py::arg("slots"), py::arg("tests"), py::arg("available") = py::none());
}
