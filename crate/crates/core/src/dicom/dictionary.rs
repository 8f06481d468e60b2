//! Implicit VR lookup for the attributes the router reads or commonly
//! meets in projection radiographs. Anything else decodes as `UN`.

use super::element::Vr;
use super::tag::Tag;

const ENTRIES: &[(u16, u16, Vr)] = &[
    (0x0002, 0x0000, Vr::UL), // FileMetaInformationGroupLength
    (0x0002, 0x0001, Vr::OB), // FileMetaInformationVersion
    (0x0002, 0x0002, Vr::UI), // MediaStorageSOPClassUID
    (0x0002, 0x0003, Vr::UI), // MediaStorageSOPInstanceUID
    (0x0002, 0x0010, Vr::UI), // TransferSyntaxUID
    (0x0002, 0x0012, Vr::UI), // ImplementationClassUID
    (0x0002, 0x0013, Vr::SH), // ImplementationVersionName
    (0x0002, 0x0016, Vr::AE), // SourceApplicationEntityTitle
    (0x0008, 0x0005, Vr::CS), // SpecificCharacterSet
    (0x0008, 0x0008, Vr::CS), // ImageType
    (0x0008, 0x0012, Vr::DA), // InstanceCreationDate
    (0x0008, 0x0013, Vr::TM), // InstanceCreationTime
    (0x0008, 0x0016, Vr::UI), // SOPClassUID
    (0x0008, 0x0018, Vr::UI), // SOPInstanceUID
    (0x0008, 0x0020, Vr::DA), // StudyDate
    (0x0008, 0x0021, Vr::DA), // SeriesDate
    (0x0008, 0x0022, Vr::DA), // AcquisitionDate
    (0x0008, 0x0023, Vr::DA), // ContentDate
    (0x0008, 0x0030, Vr::TM), // StudyTime
    (0x0008, 0x0031, Vr::TM), // SeriesTime
    (0x0008, 0x0032, Vr::TM), // AcquisitionTime
    (0x0008, 0x0033, Vr::TM), // ContentTime
    (0x0008, 0x0050, Vr::SH), // AccessionNumber
    (0x0008, 0x0060, Vr::CS), // Modality
    (0x0008, 0x0064, Vr::CS), // ConversionType
    (0x0008, 0x0070, Vr::LO), // Manufacturer
    (0x0008, 0x0080, Vr::LO), // InstitutionName
    (0x0008, 0x0090, Vr::PN), // ReferringPhysicianName
    (0x0008, 0x0100, Vr::SH), // CodeValue
    (0x0008, 0x0102, Vr::SH), // CodingSchemeDesignator
    (0x0008, 0x0104, Vr::LO), // CodeMeaning
    (0x0008, 0x1010, Vr::SH), // StationName
    (0x0008, 0x1030, Vr::LO), // StudyDescription
    (0x0008, 0x103E, Vr::LO), // SeriesDescription
    (0x0008, 0x1040, Vr::LO), // InstitutionalDepartmentName
    (0x0008, 0x1090, Vr::LO), // ManufacturerModelName
    (0x0008, 0x1110, Vr::SQ), // ReferencedStudySequence
    (0x0008, 0x1115, Vr::SQ), // ReferencedSeriesSequence
    (0x0008, 0x1140, Vr::SQ), // ReferencedImageSequence
    (0x0008, 0x1150, Vr::UI), // ReferencedSOPClassUID
    (0x0008, 0x1155, Vr::UI), // ReferencedSOPInstanceUID
    (0x0008, 0x2111, Vr::ST), // DerivationDescription
    (0x0010, 0x0010, Vr::PN), // PatientName
    (0x0010, 0x0020, Vr::LO), // PatientID
    (0x0010, 0x0030, Vr::DA), // PatientBirthDate
    (0x0010, 0x0040, Vr::CS), // PatientSex
    (0x0010, 0x1010, Vr::AS), // PatientAge
    (0x0010, 0x1020, Vr::DS), // PatientSize
    (0x0010, 0x1030, Vr::DS), // PatientWeight
    (0x0010, 0x4000, Vr::LT), // PatientComments
    (0x0018, 0x0015, Vr::CS), // BodyPartExamined
    (0x0018, 0x0060, Vr::DS), // KVP
    (0x0018, 0x1000, Vr::LO), // DeviceSerialNumber
    (0x0018, 0x1020, Vr::LO), // SoftwareVersions
    (0x0018, 0x1030, Vr::LO), // ProtocolName
    (0x0018, 0x1150, Vr::IS), // ExposureTime
    (0x0018, 0x1151, Vr::IS), // XRayTubeCurrent
    (0x0018, 0x1152, Vr::IS), // Exposure
    (0x0018, 0x1164, Vr::DS), // ImagerPixelSpacing
    (0x0018, 0x5101, Vr::CS), // ViewPosition
    (0x0020, 0x000D, Vr::UI), // StudyInstanceUID
    (0x0020, 0x000E, Vr::UI), // SeriesInstanceUID
    (0x0020, 0x0010, Vr::SH), // StudyID
    (0x0020, 0x0011, Vr::IS), // SeriesNumber
    (0x0020, 0x0013, Vr::IS), // InstanceNumber
    (0x0020, 0x0020, Vr::CS), // PatientOrientation
    (0x0020, 0x0060, Vr::CS), // Laterality
    (0x0028, 0x0002, Vr::US), // SamplesPerPixel
    (0x0028, 0x0004, Vr::CS), // PhotometricInterpretation
    (0x0028, 0x0008, Vr::IS), // NumberOfFrames
    (0x0028, 0x0010, Vr::US), // Rows
    (0x0028, 0x0011, Vr::US), // Columns
    (0x0028, 0x0030, Vr::DS), // PixelSpacing
    (0x0028, 0x0100, Vr::US), // BitsAllocated
    (0x0028, 0x0101, Vr::US), // BitsStored
    (0x0028, 0x0102, Vr::US), // HighBit
    (0x0028, 0x0103, Vr::US), // PixelRepresentation
    (0x0028, 0x1050, Vr::DS), // WindowCenter
    (0x0028, 0x1051, Vr::DS), // WindowWidth
    (0x0028, 0x1052, Vr::DS), // RescaleIntercept
    (0x0028, 0x1053, Vr::DS), // RescaleSlope
    (0x0028, 0x1054, Vr::LO), // RescaleType
    (0x0028, 0x2110, Vr::CS), // LossyImageCompression
    (0x0032, 0x1060, Vr::LO), // RequestedProcedureDescription
    (0x0040, 0x0244, Vr::DA), // PerformedProcedureStepStartDate
    (0x0040, 0x0245, Vr::TM), // PerformedProcedureStepStartTime
    (0x0040, 0x0254, Vr::LO), // PerformedProcedureStepDescription
    (0x0040, 0x0275, Vr::SQ), // RequestAttributesSequence
    (0x0040, 0x1001, Vr::SH), // RequestedProcedureID
    (0x7FE0, 0x0010, Vr::OW), // PixelData
];

/// VR for `tag` under implicit encoding.
pub fn implicit_vr(tag: Tag) -> Vr {
    if tag.element == 0x0000 {
        return Vr::UL;
    }
    ENTRIES
        .binary_search_by(|&(g, e, _)| (g, e).cmp(&(tag.group, tag.element)))
        .map_or(Vr::UN, |i| ENTRIES[i].2)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn entries_are_sorted_for_binary_search() {
        assert!(ENTRIES
            .windows(2)
            .all(|w| (w[0].0, w[0].1) < (w[1].0, w[1].1)));
    }

    #[test]
    fn known_and_unknown_tags() {
        assert_eq!(implicit_vr(Tag::new(0x0028, 0x0010)), Vr::US);
        assert_eq!(implicit_vr(Tag::new(0x7FE0, 0x0010)), Vr::OW);
        assert_eq!(implicit_vr(Tag::new(0x0008, 0x0000)), Vr::UL);
        assert_eq!(implicit_vr(Tag::new(0x0009, 0x1010)), Vr::UN);
    }
}
