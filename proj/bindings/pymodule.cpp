#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "cmlab/air.hpp"
#include "cmlab/ldpc.hpp"
#include "cmlab/sweep.hpp"
#include "cmlab/trace_io.hpp"
#include "cmlab/ttcm.hpp"

namespace py = pybind11;
using namespace cmlab;

namespace {

std::vector<Point> points_from_array(const py::array_t<double, py::array::c_style | py::array::forcecast>& a) {
    if (a.ndim() != 2 || a.shape(1) != 2) throw std::invalid_argument("expected an (N, 2) float array");
    std::vector<Point> out(static_cast<size_t>(a.shape(0)));
    auto r = a.unchecked<2>();
    for (py::ssize_t i = 0; i < a.shape(0); ++i) out[static_cast<size_t>(i)] = {r(i, 0), r(i, 1)};
    return out;
}

py::array_t<double> array_from_points(const std::vector<Point>& pts) {
    py::array_t<double> a({static_cast<py::ssize_t>(pts.size()), static_cast<py::ssize_t>(2)});
    auto w = a.mutable_unchecked<2>();
    for (size_t i = 0; i < pts.size(); ++i) {
        w(static_cast<py::ssize_t>(i), 0) = pts[i].x;
        w(static_cast<py::ssize_t>(i), 1) = pts[i].y;
    }
    return a;
}

Bits bits_from_array(const py::array_t<uint8_t, py::array::c_style | py::array::forcecast>& a) {
    if (a.ndim() != 1) throw std::invalid_argument("expected a 1-d uint8 bit array");
    return Bits(a.data(), a.data() + a.shape(0));
}

py::array_t<uint8_t> array_from_bits(const Bits& b) {
    py::array_t<uint8_t> a(static_cast<py::ssize_t>(b.size()));
    std::copy(b.begin(), b.end(), a.mutable_data());
    return a;
}

py::array_t<double> array_from_doubles(const std::vector<double>& v) {
    py::array_t<double> a(static_cast<py::ssize_t>(v.size()));
    std::copy(v.begin(), v.end(), a.mutable_data());
    return a;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Coded-modulation simulation core: 8PSK TTCM and BICM LDPC over correlated AWGN";

    py::enum_<Labeling>(m, "Labeling")
        .value("natural", Labeling::natural)
        .value("brgc", Labeling::brgc);
    py::enum_<Scheme>(m, "Scheme").value("ttcm", Scheme::ttcm).value("ldpc", Scheme::ldpc);
    py::enum_<FirstIterMetric>(m, "FirstIterMetric")
        .value("marginalize", FirstIterMetric::marginalize)
        .value("log_sum", FirstIterMetric::log_sum);

    py::class_<Constellation>(m, "Constellation")
        .def_property_readonly("points", [](const Constellation& c) { return array_from_points(c.points); })
        .def_property_readonly("labels",
                               [](const Constellation& c) {
                                   py::array_t<uint8_t> a({static_cast<py::ssize_t>(8), static_cast<py::ssize_t>(3)});
                                   auto w = a.mutable_unchecked<2>();
                                   for (int i = 0; i < 8; ++i)
                                       for (int k = 0; k < 3; ++k) w(i, k) = c.labels[i][k];
                                   return a;
                               })
        .def_property_readonly("labeling", [](const Constellation& c) { return c.labeling; })
        .def_readonly_static("m", &Constellation::m)
        .def_readonly_static("M", &Constellation::M);
    m.def("build_8psk", &build_8psk, py::arg("labeling"));

    py::class_<Covariance>(m, "Covariance")
        .def(py::init<double, double, double>(), py::arg("xx"), py::arg("xy"), py::arg("yy"))
        .def_static("isotropic", &Covariance::isotropic)
        .def_property_readonly("xx", &Covariance::xx)
        .def_property_readonly("xy", &Covariance::xy)
        .def_property_readonly("yy", &Covariance::yy)
        .def("positive_definite", &Covariance::positive_definite)
        .def("matrix", [](const Covariance& s) {
            py::array_t<double> a({2, 2});
            auto w = a.mutable_unchecked<2>();
            w(0, 0) = s.xx();
            w(0, 1) = s.xy();
            w(1, 0) = s.xy();
            w(1, 1) = s.yy();
            return a;
        });

    py::class_<Trace>(m, "Trace")
        .def(py::init([](py::array_t<double> tx, py::array_t<double> rx, py::array_t<uint8_t> bits,
                         Scheme scheme, uint64_t seed, double nominal) {
                 Trace t;
                 t.tx = points_from_array(tx);
                 t.rx = points_from_array(rx);
                 t.data_bits = bits_from_array(bits);
                 t.scheme = scheme;
                 t.seed = seed;
                 t.nominal_snr_db = nominal;
                 return t;
             }),
             py::arg("tx"), py::arg("rx"), py::arg("data_bits"), py::arg("scheme") = Scheme::ttcm,
             py::arg("seed") = 0, py::arg("nominal_snr_db") = 0.0)
        .def_property_readonly("tx", [](const Trace& t) { return array_from_points(t.tx); })
        .def_property_readonly("rx", [](const Trace& t) { return array_from_points(t.rx); })
        .def_property_readonly("data_bits", [](const Trace& t) { return array_from_bits(t.data_bits); })
        .def_readonly("scheme", &Trace::scheme)
        .def_readonly("seed", &Trace::seed)
        .def_readonly("nominal_snr_db", &Trace::nominal_snr_db)
        .def("__len__", [](const Trace& t) { return t.n_symbols(); });

    m.def("map_bits", [](py::array_t<uint8_t> bits, const Constellation& c) {
        return array_from_points(map_bits(bits_from_array(bits), c));
    });
    m.def("symbol_log_likelihoods", [](py::array_t<double> y, const Constellation& c, const Covariance& s) {
        auto pts = points_from_array(y);
        Covariance::InverseForm inv = s.inverse();
        py::array_t<double> a({static_cast<py::ssize_t>(pts.size()), static_cast<py::ssize_t>(8)});
        auto w = a.mutable_unchecked<2>();
        for (size_t i = 0; i < pts.size(); ++i) {
            SymbolLL ll = symbol_log_likelihoods(pts[i], c, inv);
            for (int j = 0; j < 8; ++j) w(static_cast<py::ssize_t>(i), j) = ll[j];
        }
        return a;
    });
    m.def("bitwise_llrs", [](py::array_t<double> lls, const Constellation& c) {
        if (lls.ndim() != 2 || lls.shape(1) != 8) throw std::invalid_argument("expected an (N, 8) array");
        auto r = lls.unchecked<2>();
        py::array_t<double> a({lls.shape(0), static_cast<py::ssize_t>(3)});
        auto w = a.mutable_unchecked<2>();
        for (py::ssize_t i = 0; i < lls.shape(0); ++i) {
            SymbolLL ll;
            for (int j = 0; j < 8; ++j) ll[j] = r(i, j);
            BitLlr l = bitwise_llrs(ll, c);
            for (int k = 0; k < 3; ++k) w(i, k) = l[k];
        }
        return a;
    });
    m.def("hard_demap", [](py::array_t<double> y, const Constellation& c) {
        auto pts = points_from_array(y);
        py::array_t<int> idx(static_cast<py::ssize_t>(pts.size()));
        py::array_t<uint8_t> bits({static_cast<py::ssize_t>(pts.size()), static_cast<py::ssize_t>(3)});
        auto wi = idx.mutable_unchecked<1>();
        auto wb = bits.mutable_unchecked<2>();
        for (size_t i = 0; i < pts.size(); ++i) {
            HardDecision hd = hard_demap(pts[i], c);
            wi(static_cast<py::ssize_t>(i)) = hd.index;
            for (int k = 0; k < 3; ++k) wb(static_cast<py::ssize_t>(i), k) = hd.bits[k];
        }
        return py::make_tuple(idx, bits);
    });

    m.def("sigma_from_snr", &sigma_from_snr, py::arg("snr_db"), py::arg("constellation"));
    m.def("apply_awgn", [](py::array_t<double> sym, const Covariance& s, uint64_t seed) {
        return array_from_points(apply_awgn(points_from_array(sym), s, seed));
    });
    m.def("estimate_covariance", &estimate_covariance);
    m.def("measure_snr", &measure_snr);
    m.def("rx_noise_load", &rx_noise_load, py::arg("trace"), py::arg("target_snr_db"),
          py::arg("n_realizations"), py::arg("seed"));

    py::class_<OddEvenInterleaver>(m, "OddEvenInterleaver")
        .def_property_readonly("pi",
                               [](const OddEvenInterleaver& il) {
                                   py::array_t<uint32_t> a(static_cast<py::ssize_t>(il.pi.size()));
                                   std::copy(il.pi.begin(), il.pi.end(), a.mutable_data());
                                   return a;
                               })
        .def_readonly("spread", &OddEvenInterleaver::spread)
        .def_readonly("seed", &OddEvenInterleaver::seed);
    m.def("build_interleaver", &build_interleaver, py::arg("n_s"), py::arg("spread"), py::arg("seed"));
    m.def("default_spread", &default_spread);

    m.def("ttcm_encode", [](py::array_t<uint8_t> data, const OddEvenInterleaver& il, const Constellation& c) {
        return array_from_points(ttcm_encode(bits_from_array(data), il, c));
    });
    m.def(
        "ttcm_decode",
        [](py::array_t<double> y, const Covariance& s, const OddEvenInterleaver& il,
           const Constellation& c, int iterations, FirstIterMetric metric) {
            TtcmDecodeOutput out = ttcm_decode(points_from_array(y), s, il, c, iterations, metric);
            return py::make_tuple(array_from_bits(out.data_bits), array_from_doubles(out.lambda));
        },
        py::arg("y"), py::arg("sigma"), py::arg("interleaver"), py::arg("constellation"),
        py::arg("iterations") = 10, py::arg("metric") = FirstIterMetric::marginalize);

    py::class_<LdpcCode>(m, "LdpcCode")
        .def_readonly("n", &LdpcCode::n)
        .def_readonly("k", &LdpcCode::k)
        .def_readonly("q", &LdpcCode::q);
    m.def("build_dvbs2_r23", &build_dvbs2_r23, py::arg("table_path") = default_dvbs2_table_path());
    m.def("default_dvbs2_table_path", &default_dvbs2_table_path);
    m.def("ldpc_encode", [](py::array_t<uint8_t> info, const LdpcCode& code) {
        return array_from_bits(ldpc_encode(bits_from_array(info), code));
    });
    m.def(
        "bp_decode",
        [](py::array_t<double> llrs, const LdpcCode& code, int max_iter, bool early_term) {
            std::vector<double> l(llrs.data(), llrs.data() + llrs.size());
            BpResult r = bp_decode(l, code, max_iter, early_term);
            return py::make_tuple(array_from_bits(r.bits), array_from_doubles(r.posterior), r.converged,
                                  r.iterations);
        },
        py::arg("llrs"), py::arg("code"), py::arg("max_iter") = 50, py::arg("early_term") = true);

    py::class_<BitInterleaver>(m, "BitInterleaver").def_readonly("seed", &BitInterleaver::seed);
    m.def("build_bit_interleaver", &build_bit_interleaver, py::arg("n_bits"), py::arg("seed"));
    m.def("bicm_encode",
          [](py::array_t<uint8_t> data, const LdpcCode& code, const BitInterleaver& il,
             const Constellation& c) {
              return array_from_points(bicm_encode(bits_from_array(data), code, il, c));
          });
    m.def(
        "bicm_decode",
        [](py::array_t<double> y, const Covariance& s, const LdpcCode& code, const BitInterleaver& il,
           const Constellation& c, int max_iter, bool early_term) {
            BicmDecodeOutput out = bicm_decode(points_from_array(y), s, code, il, c, max_iter, early_term);
            return py::make_tuple(array_from_bits(out.data_bits), array_from_doubles(out.lambda),
                                  out.lanes_converged);
        },
        py::arg("y"), py::arg("sigma"), py::arg("code"), py::arg("interleaver"), py::arg("constellation"),
        py::arg("max_iter") = 50, py::arg("early_term") = true);
    m.def("bicm_encode_single", [](py::array_t<uint8_t> data, const LdpcCode& code, const Constellation& c) {
        return array_from_points(bicm_encode_single(bits_from_array(data), code, c));
    });
    m.def(
        "bicm_decode_single",
        [](py::array_t<double> y, const Covariance& s, const LdpcCode& code, const Constellation& c,
           int max_iter, bool early_term) {
            BicmDecodeOutput out = bicm_decode_single(points_from_array(y), s, code, c, max_iter, early_term);
            return py::make_tuple(array_from_bits(out.data_bits), array_from_doubles(out.lambda),
                                  out.lanes_converged);
        },
        py::arg("y"), py::arg("sigma"), py::arg("code"), py::arg("constellation"),
        py::arg("max_iter") = 50, py::arg("early_term") = true);

    m.def("mi_closed_form", &mi_closed_form);
    m.def("mi_generic_mc", &mi_generic_mc);
    m.def("gmi_closed_form", &gmi_closed_form);
    m.def("gmi_generic_mc", &gmi_generic_mc);
    m.def("postfec_mi_sd", [](py::array_t<uint8_t> data, py::array_t<double> lambda) {
        std::vector<double> l(lambda.data(), lambda.data() + lambda.size());
        return postfec_mi_sd(bits_from_array(data), l);
    });
    m.def("postfec_mi_hd", &postfec_mi_hd);
    m.def("binary_entropy", &binary_entropy);
    m.def("min_ber_bound", &min_ber_bound);
    m.def("awgn_capacity", &awgn_capacity);

    m.def("save_trace", &save_trace, py::arg("traces"), py::arg("path"), py::arg("master_seed"));
    m.def("load_trace", &load_trace, py::arg("path"));

    py::class_<SweepConfig>(m, "SweepConfig")
        .def(py::init<>())
        .def_readwrite("scheme", &SweepConfig::scheme)
        .def_readwrite("snr_grid_db", &SweepConfig::snr_grid_db)
        .def_readwrite("n_s", &SweepConfig::n_s)
        .def_readwrite("codewords", &SweepConfig::codewords)
        .def_readwrite("iterations", &SweepConfig::iterations)
        .def_readwrite("master_seed", &SweepConfig::master_seed)
        .def_readwrite("interleaver_seed", &SweepConfig::interleaver_seed)
        .def_readwrite("out_path", &SweepConfig::out_path)
        .def_readwrite("threads", &SweepConfig::threads)
        .def_readwrite("early_term", &SweepConfig::early_term)
        .def_readwrite("min_bit_errors", &SweepConfig::min_bit_errors);
    py::class_<ResultRow>(m, "ResultRow")
        .def_readonly("scheme", &ResultRow::scheme)
        .def_readonly("snr_db", &ResultRow::snr_db)
        .def_readonly("n_s", &ResultRow::n_s)
        .def_readonly("n_codewords", &ResultRow::n_codewords)
        .def_readonly("pre_fec_ber", &ResultRow::pre_fec_ber)
        .def_readonly("post_fec_ber", &ResultRow::post_fec_ber)
        .def_readonly("mi", &ResultRow::mi)
        .def_readonly("gmi", &ResultRow::gmi)
        .def_readonly("i_sd", &ResultRow::i_sd)
        .def_readonly("i_hd", &ResultRow::i_hd)
        .def_readonly("awgn_capacity", &ResultRow::awgn_cap)
        .def_readonly("min_ber_mi", &ResultRow::min_ber_mi)
        .def_readonly("min_ber_gmi", &ResultRow::min_ber_gmi)
        .def_readonly("censored", &ResultRow::censored)
        .def_readonly("seed", &ResultRow::seed);
    m.def("run_ber_sweep", &run_ber_sweep, py::call_guard<py::gil_scoped_release>());
    m.def("run_air_sweep", &run_air_sweep, py::call_guard<py::gil_scoped_release>());
    m.def("generate_traces", &generate_traces, py::arg("config"), py::arg("snr_db"), py::arg("count"),
          py::call_guard<py::gil_scoped_release>());
}
